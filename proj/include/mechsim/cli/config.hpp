// Run configuration: a YAML file plus dotted-path overrides.
//
//   system:            # physical frame, exactly one of preset / params
//     preset: cqed
//     drive: [re, im]  # rad/s, optional; or alpha: mean field to drive to
//     delta: 0.0       # rad/s, optional
//   rates:             # direct frame rates instead of `system`
//     omega_c: 1.0
//     omega_m: 0.7
//     g0: 0.05
//     g: 0.0
//     scaled_from: {preset: cqed, alpha: 80752, g0_over_omega_c: 0.5}
//   space: {n_a: 20, n_b: 20}
//   run: {t_max: 6.28, n_steps: 400, include_small: true,
//         initial_state: {kind: coherent, alpha_a: 1, alpha_b: 1}}
//   output: {dir: out}
//
// Frequency keys also accept a `_hz` suffix (multiplied by 2 pi).
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mechsim/fock.hpp"
#include "mechsim/model.hpp"

namespace mechsim::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialState {
  std::string kind = "vacuum";  // vacuum | fock | coherent
  int j = 0;
  int k = 0;
  cplx alpha_a{0.0, 0.0};
  cplx alpha_b{0.0, 0.0};

  PureState build(const ModeSpace& space) const;
};

struct ScaledFrom {
  std::string preset;
  double alpha = 0.0;
  double g0_over_omega_c = 0.0;
  bool uncorrected = false;  // use g0 = g alpha without the squeezing factor
};

struct RunConfig {
  std::string source = "<inline>";

  // exactly one of physical / rates
  std::optional<std::string> preset_name;
  std::optional<PhysicalParams> physical;
  std::optional<FrameRates> rates;
  std::optional<ScaledFrom> scaled;
  bool physical_units() const { return physical.has_value(); }

  int n_a = 20;
  int n_b = 20;

  std::optional<double> t_max;
  std::optional<double> t_max_cavity_periods;
  int n_steps = 0;  // 0: default rule
  bool include_small = false;
  InitialState initial;

  std::string out_dir = "out";

  double squeezing_db = 4.7;
  std::optional<double> budget_alpha;

  std::vector<std::string> wigner_modes{"b"};
  std::vector<double> wigner_times;
  std::vector<double> wigner_times_cavity_periods;
  int wigner_points = 121;  // per axis
  std::optional<double> wigner_extent;

  int spectrum_n_max = 4;
  int spectrum_l_max = 4;
  double spectrum_chi = 0.0;
  bool spectrum_chi_cure = false;

  ModeSpace space() const { return ModeSpace(n_a, n_b); }
  /// Frame rates from the direct section, the scaled preset, or the solved physical frame.
  FrameRates frame_rates() const;
  std::optional<DerivedFrame> physical_frame() const;
  double t_final() const;
  /// run.n_steps or the default sampling rule (refused above 200000 steps).
  int steps() const;
};

/// Applies "a.b.c=value" overrides (value parsed as YAML) to the document.
void apply_override(YAML::Node& root, const std::string& assignment);

RunConfig parse_config(const YAML::Node& root, const std::string& source = "<inline>");
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
RunConfig load_config_string(const std::string& text, const std::vector<std::string>& overrides = {});

}  // namespace mechsim::cli
