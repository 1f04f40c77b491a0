#include "mechsim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mechsim/analytic.hpp"

namespace mechsim {

double state_fidelity(const PureState& psi1, const PureState& psi2) {
  if (psi1.dim() != psi2.dim()) throw std::invalid_argument("state_fidelity: dimension mismatch");
  return std::norm(psi1.amplitudes().dot(psi2.amplitudes()));
}

double FidelityTrace::min_F_exact() const {
  return F_exact.empty() ? 1.0 : *std::min_element(F_exact.begin(), F_exact.end());
}

namespace {

FidelityTrace compare(const std::vector<PureState>& lhs, const std::vector<PureState>& rhs,
                      const FrameRates& rates, const TimeGrid& grid, const ModeSpace& space) {
  FidelityTrace tr;
  tr.epsilon = rates.epsilon();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double f = state_fidelity(lhs[k], rhs[k]);
    const double fu = F_uni(rates, t);
    tr.times.push_back(t);
    tr.eta.push_back(rates.omega_m * t);
    tr.F_exact.push_back(f);
    tr.F_perturbative.push_back(1.0 - fu);
    tr.deficit_exact.push_back(1.0 - f);
    tr.deficit_perturbative.push_back(fu);
    tr.g0_t.push_back(std::abs(rates.g0) * t);
    tr.valid.push_back(std::abs(rates.g0) * t <= 0.1 && std::abs(tr.epsilon) < 0.1);
    tr.max_edge_weight = std::max({tr.max_edge_weight, fock::edge_weight(lhs[k], space),
                                   fock::edge_weight(rhs[k], space)});
  }
  return tr;
}

}  // namespace

FidelityTrace ds_vs_mo_experiment(const FrameRates& rates, const PureState& psi0,
                                  const TimeGrid& grid, const ModeSpace& space,
                                  bool include_small) {
  const EvolutionResult ds =
      evolve_unitary(build_H_DS(rates, space, include_small), psi0, grid, "H_DS");
  const EvolutionResult mo = evolve_unitary(build_H_MO(rates, space), psi0, grid, "H_MO");
  return compare(ds.pure, mo.pure, rates, grid, space);
}

FidelityTrace full_chain_experiment(const PhysicalParams& params, const PureState& psi0,
                                    const TimeGrid& grid, const ModeSpace& space,
                                    double max_initial_edge_weight) {
  if (params.kappa != 0.0) {
    throw std::invalid_argument("full_chain_experiment: requires kappa = 0");
  }
  const DerivedFrame frame = solve_frame(params);
  PhysicalParams rotated = params;
  rotated.drive = frame.drive_rotated;

  const Operator d = displacement_op(cplx(frame.alpha, 0.0), space.n_a(), Mode::a);
  const Operator s = squeezing_op(cplx(frame.r, 0.0), space.n_b(), Mode::b);
  const Operator ds = fock::tensor(d, s, space);
  const PureState lab0 = psi0.applied(ds.matrix());
  const double edge = fock::edge_weight(lab0, space);
  if (edge > max_initial_edge_weight) {
    std::ostringstream msg;
    msg << "full_chain_experiment: displaced-squeezed initial state puts weight " << edge
        << " on the top two Fock levels (limit " << max_initial_edge_weight
        << "); enlarge the truncation";
    throw TruncationError(msg.str(), space.n_a() + 10);
  }

  const EvolutionResult lab = evolve_unitary(build_H_full(rotated, space), lab0, grid, "H_full");
  const EvolutionResult mo = evolve_unitary(build_H_MO(frame.rates(), space), psi0, grid, "H_MO");
  std::vector<PureState> back;
  back.reserve(lab.pure.size());
  const Matrix inv = ds.matrix().adjoint();
  for (const auto& psi : lab.pure) back.push_back(psi.applied(inv));
  FidelityTrace tr = compare(back, mo.pure, frame.rates(), grid, space);
  for (const auto& psi : lab.pure) {
    tr.max_edge_weight = std::max(tr.max_edge_weight, fock::edge_weight(psi, space));
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Wigner

WignerSpec WignerSpec::around(const DensityMatrix& rho, int n) {
  double nbar = 0.0;
  for (int k = 0; k < rho.dim(); ++k) nbar += k * rho.matrix()(k, k).real();
  // Also reach the orbit of the level below which 99.9% of the weight sits.
  int k_top = 0;
  for (double cum = 0.0; k_top < rho.dim(); ++k_top) {
    cum += rho.matrix()(k_top, k_top).real();
    if (cum >= 1.0 - 1e-3) break;
  }
  const double r = std::max(std::sqrt(2.0 * std::max(nbar, 0.0)) + 3.0,
                            std::sqrt(2.0 * k_top + 1.0) + 1.0);
  return {-r, r, -r, r, n, n};
}

WignerGrid wigner(const DensityMatrix& rho, const WignerSpec& spec, kernels::Backend backend) {
  if (spec.n_x < 2 || spec.n_p < 2 || !(spec.x_max > spec.x_min) || !(spec.p_max > spec.p_min)) {
    throw std::invalid_argument("wigner: invalid grid specification");
  }
  // Tail diagnostic: weight on levels whose classical orbit leaves the grid.
  const double reach = std::min({std::abs(spec.x_min), std::abs(spec.x_max), std::abs(spec.p_min),
                                 std::abs(spec.p_max)});
  const bool contains_origin =
      spec.x_min <= 0.0 && spec.x_max >= 0.0 && spec.p_min <= 0.0 && spec.p_max >= 0.0;
  if (contains_origin) {
    double outside = 0.0;
    for (int k = 0; k < rho.dim(); ++k) {
      if (std::sqrt(2.0 * k + 1.0) > reach) outside += rho.matrix()(k, k).real();
    }
    if (outside > 1e-2) {
      std::ostringstream msg;
      msg << "wigner: grid half-width " << reach << " too small, " << outside
          << " of the state's weight lies beyond it";
      throw WignerGridError(msg.str());
    }
  }

  WignerGrid g;
  g.spec = spec;
  g.backend = backend;
  g.x.resize(spec.n_x);
  g.p.resize(spec.n_p);
  for (int i = 0; i < spec.n_x; ++i) g.x[i] = spec.x_min + i * spec.dx();
  for (int i = 0; i < spec.n_p; ++i) g.p[i] = spec.p_min + i * spec.dp();

  const std::size_t n = static_cast<std::size_t>(spec.n_x) * spec.n_p;
  std::vector<double> xs(n), ps(n), out(n);
  for (int ip = 0; ip < spec.n_p; ++ip) {
    for (int ix = 0; ix < spec.n_x; ++ix) {
      xs[ip * spec.n_x + ix] = g.x[ix];
      ps[ip * spec.n_x + ix] = g.p[ip];
    }
  }
  const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = rho.matrix();
  kernels::wigner_points(backend, rm.data(), rho.dim(), xs.data(), ps.data(), out.data(), n);
  g.values.resize(spec.n_p, spec.n_x);
  for (int ip = 0; ip < spec.n_p; ++ip)
    for (int ix = 0; ix < spec.n_x; ++ix) g.values(ip, ix) = out[ip * spec.n_x + ix];
  return g;
}

double WignerGrid::integral() const { return values.sum() * spec.dx() * spec.dp(); }

double WignerGrid::min() const { return values.minCoeff(); }

double negativity_volume(const WignerGrid& w) {
  return w.values.cwiseMin(0.0).cwiseAbs().sum() * w.spec.dx() * w.spec.dp();
}

}  // namespace mechsim
