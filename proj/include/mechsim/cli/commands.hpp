// Subcommand implementations. Each run_* computes, each cmd_* also writes files
// under the output directory and returns the process exit status.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mechsim/analytic.hpp"
#include "mechsim/cli/config.hpp"
#include "mechsim/cli/output.hpp"
#include "mechsim/measure.hpp"

namespace mechsim::cli {

namespace fs = std::filesystem;

struct BudgetReport {
  double n_p = 0.0;                 // thermal phonon number
  double decoherence_time = 0.0;    // s, 1/(gamma_m n_p)
  double periods_within_decoherence = 0.0;
  double squeezing_db = 0.0;
  double r_max = 0.0;               // |r| reachable with squeezing_db
  std::optional<DerivedFrame> frame;  // present when a mean field is known
  double l_max = 0.0;
  double epsilon = 0.0;

  bool ground_state = false;         // n_p < 1
  bool sideband_resolved = false;    // kappa < omega_m
  bool squeezing_reachable = false;  // |r| of the frame <= r_max
  bool perturbative = false;         // epsilon < 0.1

  json to_json() const;
};

BudgetReport run_budget(const RunConfig& cfg);

FidelityTrace run_fidelity(const RunConfig& cfg);

struct WignerSnapshot {
  std::string mode;
  double time = 0.0;
  WignerGrid grid;
  double negativity = 0.0;
};

/// Snapshots ordered by (mode, time) as configured; threads <= 0 reads MECH_SIM_THREADS.
std::vector<WignerSnapshot> run_wigner(const RunConfig& cfg, int threads = 0);

/// Rows for n <= n_max, l <= l_max with the numerical cross-check.
std::vector<SpectrumRow> run_spectrum(const RunConfig& cfg);
double spectrum_chi(const RunConfig& cfg);

/// MECH_SIM_THREADS, or the hardware concurrency.
int thread_budget();

int cmd_budget(const RunConfig& cfg, const fs::path& out, std::ostream& log);
int cmd_fidelity(const RunConfig& cfg, const fs::path& out, std::ostream& log);
int cmd_wigner(const RunConfig& cfg, const fs::path& out, std::ostream& log);
int cmd_spectrum(const RunConfig& cfg, const fs::path& out, std::ostream& log);
int cmd_presets(std::ostream& log);

}  // namespace mechsim::cli
