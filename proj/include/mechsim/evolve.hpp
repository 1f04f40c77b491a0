// Propagators: spectral exponentials, fourth-order Magnus steps for
// time-dependent generators, and RK4 for the cavity-decay master equation.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mechsim/fock.hpp"
#include "mechsim/model.hpp"
#include "mechsim/schedule.hpp"

namespace mechsim {

class EvolutionError : public std::runtime_error {
 public:
  EvolutionError(const std::string& what, int recommended_steps = 0)
      : std::runtime_error(what), recommended_steps_(recommended_steps) {}
  int recommended_steps() const { return recommended_steps_; }

 private:
  int recommended_steps_;
};

class TimeGrid {
 public:
  /// n_steps + 1 uniformly spaced samples on [t0, t1].
  static TimeGrid uniform(double t0, double t1, int n_steps);
  /// Arbitrary strictly increasing sample times.
  static TimeGrid from_times(std::vector<double> times);

  double t0() const { return times_.front(); }
  double t1() const { return times_.back(); }
  int n_steps() const { return static_cast<int>(times_.size()) - 1; }
  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  double operator[](std::size_t k) const { return times_[k]; }

 private:
  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {}
  std::vector<double> times_;
};

/// Samples per shortest period min(2 pi/Omega_c, 2 pi/Omega_m, pi/|g0|), 200 each.
int default_step_count(const FrameRates& rates, double duration, int per_period = 200);

struct Diagnostics {
  std::vector<double> norm_drift;   // | ||psi||^2 - 1 | or |tr rho - 1| per sample
  std::vector<double> energy_drift; // relative <H> change (time-independent unitary runs)
  std::vector<double> purity;       // mixed runs
  std::vector<double> min_eigenvalue;
  std::vector<std::string> warnings;
  int substeps = 0;                 // integrator steps between consecutive samples
  double self_check_deviation = 0.0;
};

struct EvolutionResult {
  TimeGrid grid;
  std::vector<PureState> pure;        // filled by unitary propagators
  std::vector<DensityMatrix> mixed;   // filled by evolve_lindblad
  std::string generator_label;
  Diagnostics diagnostics;

  bool is_mixed() const { return !mixed.empty(); }
};

/// exp(-i H t) through one eigendecomposition of H.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const Operator& h);

  Vector apply(const Vector& psi, double t) const;
  Matrix matrix(double t) const;
  const RealVector& eigenvalues() const { return evals_; }
  const Matrix& eigenvectors() const { return evecs_; }

 private:
  RealVector evals_;
  Matrix evecs_;
};

/// Throws if h is not Hermitian within 1e-12 relative to max|h|.
void require_hermitian(const Operator& h, const char* who);

EvolutionResult evolve_unitary(const Operator& h, const PureState& psi0, const TimeGrid& grid,
                               std::string label = "H");

using Generator = std::function<Operator(double)>;

struct StepControl {
  int substeps = 0;        // per sample interval; 0 picks one from the generator norm and refines it
  bool self_check = true;  // rerun with halved steps and compare final states
  double tolerance = 1e-8;
};

EvolutionResult evolve_unitary_td(const Generator& h_of_t, const PureState& psi0,
                                  const TimeGrid& grid, const StepControl& control = {},
                                  std::string label = "H(t)");

/// H_MO with g0 taken from the schedule at each instant.
Generator mo_generator(const FrameRates& rates, const CouplingSchedule& schedule,
                       const ModeSpace& space);

/// rho' = -i[H, rho] + kappa (2 a rho a^dagger - a^dagger a rho - rho a^dagger a).
EvolutionResult evolve_lindblad(const Operator& h, const DensityMatrix& rho0, double kappa,
                                const ModeSpace& space, const TimeGrid& grid,
                                const StepControl& control = {}, std::string label = "H");

}  // namespace mechsim
