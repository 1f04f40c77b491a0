// Observables and comparisons: fidelities between frame evolutions and
// phase-space (Wigner) snapshots.
#pragma once

#include <string>
#include <vector>

#include "mechsim/evolve.hpp"
#include "mechsim/fock.hpp"
#include "mechsim/kernels/wigner.hpp"
#include "mechsim/model.hpp"

namespace mechsim {

double state_fidelity(const PureState& psi1, const PureState& psi2);

struct FidelityTrace {
  std::vector<double> times;
  std::vector<double> eta;  // Omega_m t
  std::vector<double> F_exact;
  std::vector<double> F_perturbative;  // 1 - F_uni(t)
  std::vector<double> deficit_exact;
  std::vector<double> deficit_perturbative;
  std::vector<double> g0_t;  // |g0| t, perturbative validity wants << 1
  std::vector<bool> valid;   // |g0| t <= 0.1 and epsilon < 0.1
  double epsilon = 0.0;
  double max_edge_weight = 0.0;  // largest weight on the top two Fock levels of either mode

  double min_F_exact() const;
};

/// Evolves psi0 under H_DS (optionally without H_small) and under H_MO.
FidelityTrace ds_vs_mo_experiment(const FrameRates& rates, const PureState& psi0,
                                  const TimeGrid& grid, const ModeSpace& space,
                                  bool include_small);

/// Lab-frame check of U_full(t) = D S U_DS(t) S^dagger D^dagger: evolves
/// D(alpha) S(r) psi0 under H_full, maps back with S^dagger D^dagger and
/// compares with H_MO evolution of psi0. Requires kappa = 0.
FidelityTrace full_chain_experiment(const PhysicalParams& params, const PureState& psi0,
                                    const TimeGrid& grid, const ModeSpace& space,
                                    double max_initial_edge_weight = 1e-8);

struct WignerSpec {
  double x_min = -5.0, x_max = 5.0;
  double p_min = -5.0, p_max = 5.0;
  int n_x = 121, n_p = 121;

  /// Square grid covering +-(sqrt(2 <n>) + 3).
  static WignerSpec around(const DensityMatrix& rho, int n = 121);
  double dx() const { return (x_max - x_min) / (n_x - 1); }
  double dp() const { return (p_max - p_min) / (n_p - 1); }
};

struct WignerGrid {
  WignerSpec spec;
  std::vector<double> x;
  std::vector<double> p;
  RealMatrix values;  // values(i_p, i_x)
  kernels::Backend backend = kernels::Backend::scalar;

  double integral() const;  // Riemann sum
  double min() const;
  double at(int ip, int ix) const { return values(ip, ix); }
};

class WignerGridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// W(x, p) with vacuum peak 1/pi. Throws WignerGridError if more than 1e-2 of
/// the Fock-level weight lies on levels whose classical radius sqrt(2n+1)
/// exceeds the grid.
WignerGrid wigner(const DensityMatrix& rho, const WignerSpec& spec,
                  kernels::Backend backend = kernels::best_backend());

/// Riemann sum of |min(W, 0)|.
double negativity_volume(const WignerGrid& w);

}  // namespace mechsim
