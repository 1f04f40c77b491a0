#include "mechsim/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mechsim {

TimeGrid TimeGrid::uniform(double t0, double t1, int n_steps) {
  if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: need t1 > t0");
  if (n_steps < 1) throw std::invalid_argument("TimeGrid: need n_steps >= 1");
  std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
  const double h = (t1 - t0) / n_steps;
  for (int k = 0; k <= n_steps; ++k) t[k] = t0 + k * h;
  t.back() = t1;
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::from_times(std::vector<double> times) {
  if (times.empty()) throw std::invalid_argument("TimeGrid: no sample times");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("TimeGrid: sample times must be strictly increasing");
    }
  }
  return TimeGrid(std::move(times));
}

int default_step_count(const FrameRates& rates, double duration, int per_period) {
  double period = std::numeric_limits<double>::infinity();
  if (rates.omega_c != 0.0) period = std::min(period, 2.0 * kPi / std::abs(rates.omega_c));
  if (rates.omega_m != 0.0) period = std::min(period, 2.0 * kPi / std::abs(rates.omega_m));
  if (rates.g0 != 0.0) period = std::min(period, kPi / std::abs(rates.g0));
  if (!std::isfinite(period)) return per_period;
  return std::max(1, static_cast<int>(std::ceil(per_period * duration / period)));
}

void require_hermitian(const Operator& h, const char* who) {
  const double scale = std::max(1.0, h.max_abs());
  if (h.hermiticity_defect() > 1e-12 * scale) {
    std::ostringstream msg;
    msg << who << ": generator is not Hermitian (defect " << h.hermiticity_defect() << ")";
    throw std::invalid_argument(msg.str());
  }
}

SpectralPropagator::SpectralPropagator(const Operator& h) {
  require_hermitian(h, "SpectralPropagator");
  const Matrix sym = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw EvolutionError("SpectralPropagator: eigendecomposition failed");
  }
  evals_ = solver.eigenvalues();
  evecs_ = solver.eigenvectors();
}

Vector SpectralPropagator::apply(const Vector& psi, double t) const {
  Vector c = evecs_.adjoint() * psi;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -evals_(k) * t);
  return evecs_ * c;
}

Matrix SpectralPropagator::matrix(double t) const {
  Vector phases(evals_.size());
  for (Eigen::Index k = 0; k < evals_.size(); ++k) phases(k) = std::polar(1.0, -evals_(k) * t);
  return evecs_ * phases.asDiagonal() * evecs_.adjoint();
}

EvolutionResult evolve_unitary(const Operator& h, const PureState& psi0, const TimeGrid& grid,
                               std::string label) {
  if (h.dim() != psi0.dim()) throw std::invalid_argument("evolve_unitary: dimension mismatch");
  const SpectralPropagator prop(h);
  EvolutionResult res{grid, {}, {}, std::move(label), {}};
  const double e0 = psi0.expectation(h);
  const double escale = std::max(std::abs(e0), 1e-300);
  res.pure.reserve(grid.size());
  for (double t : grid.times()) {
    const Vector v = t == grid.t0() ? psi0.amplitudes() : prop.apply(psi0.amplitudes(), t - grid.t0());
    const double drift = std::abs(v.squaredNorm() - 1.0);
    res.diagnostics.norm_drift.push_back(drift);
    if (drift > PureState::kNormTolerance) {
      throw EvolutionError("evolve_unitary: norm drift " + std::to_string(drift));
    }
    PureState psi(v);
    res.diagnostics.energy_drift.push_back(std::abs(psi.expectation(h) - e0) / escale);
    res.pure.push_back(std::move(psi));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Time-dependent unitary

namespace {

double inf_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

/// Fourth-order Magnus step on Gauss-Legendre nodes:
/// exp(-i [h (H1 + H2)/2 - i (sqrt(3)/12) h^2 [H2, H1]]).
Vector magnus4_run(const Generator& h_of_t, const Vector& psi0, const TimeGrid& grid,
                   int substeps, std::vector<Vector>* samples) {
  const double c = std::sqrt(3.0) / 6.0;
  Vector psi = psi0;
  if (samples) samples->push_back(psi);
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double a = grid[k];
    const double h = (grid[k + 1] - a) / substeps;
    for (int s = 0; s < substeps; ++s) {
      const double t = a + s * h;
      const Operator h1 = h_of_t(t + (0.5 - c) * h);
      const Operator h2 = h_of_t(t + (0.5 + c) * h);
      const Operator k_eff = cplx(0.5 * h) * (h1 + h2) +
                             cplx(0.0, -std::sqrt(3.0) / 12.0 * h * h) * commutator(h2, h1);
      psi = SpectralPropagator(k_eff).apply(psi, 1.0);
    }
    if (samples) samples->push_back(psi);
  }
  return psi;
}

}  // namespace

EvolutionResult evolve_unitary_td(const Generator& h_of_t, const PureState& psi0,
                                  const TimeGrid& grid, const StepControl& control,
                                  std::string label) {
  int n = control.substeps;
  if (n <= 0) {
    double nrm = 0.0;
    for (double t : {grid.t0(), 0.5 * (grid.t0() + grid.t1()), grid.t1()}) {
      nrm = std::max(nrm, inf_norm(h_of_t(t).matrix()));
    }
    const double dt = (grid.t1() - grid.t0()) / std::max(1, grid.n_steps());
    n = std::max(4, static_cast<int>(std::ceil(dt * nrm)));
  }
  // An automatic step count is refined (at most kMaxAutoRefinements times) until
  // the step-halving check passes; an explicit one is used as given.
  constexpr int kMaxAutoRefinements = 4;
  const bool automatic = control.substeps <= 0;
  EvolutionResult res{grid, {}, {}, std::move(label), {}};
  std::vector<Vector> samples;
  for (int attempt = 0;; ++attempt) {
    samples.clear();
    const Vector coarse = magnus4_run(h_of_t, psi0.amplitudes(), grid, n, &samples);
    res.diagnostics.substeps = n;
    if (!control.self_check) break;
    const Vector fine = magnus4_run(h_of_t, psi0.amplitudes(), grid, 2 * n, nullptr);
    const double dev = (fine - coarse).norm();
    res.diagnostics.self_check_deviation = dev;
    if (dev <= control.tolerance) break;
    // Fourth-order stepper: error ~ n^-4.
    const int rec =
        static_cast<int>(std::ceil(n * std::pow(dev / control.tolerance, 0.25) * 1.2));
    if (automatic && attempt < kMaxAutoRefinements) {
      n = std::max(rec, 2 * n);
      continue;
    }
    std::ostringstream msg;
    msg << "evolve_unitary_td: halving the step changed the final state by " << dev << " (> "
        << control.tolerance << "); use at least " << rec << " substeps per sample interval";
    throw EvolutionError(msg.str(), rec);
  }
  for (auto& v : samples) {
    const double drift = std::abs(v.squaredNorm() - 1.0);
    res.diagnostics.norm_drift.push_back(drift);
    if (drift > PureState::kNormTolerance) {
      throw EvolutionError("evolve_unitary_td: norm drift " + std::to_string(drift));
    }
    res.pure.emplace_back(std::move(v));
  }
  return res;
}

Generator mo_generator(const FrameRates& rates, const CouplingSchedule& schedule,
                       const ModeSpace& space) {
  rates.validate();
  const Operator free = build_H_MO({rates.omega_c, rates.omega_m, 0.0, 0.0}, space);
  const Operator coupling = build_H_MO({0.0, rates.omega_m, 1.0, 0.0}, space) -
                            build_H_MO({0.0, rates.omega_m, 0.0, 0.0}, space);
  return [free, coupling, schedule](double t) {
    return free + cplx(schedule(t)) * coupling;
  };
}

// ---------------------------------------------------------------------------
// Master equation

namespace {

struct Liouvillian {
  Matrix h_eff;  // H - i kappa a^dagger a
  Matrix a;
  Matrix ad;
  double kappa;

  Matrix operator()(const Matrix& rho) const {
    const cplx i(0.0, 1.0);
    Matrix out = -i * (h_eff * rho - rho * h_eff.adjoint());
    if (kappa != 0.0) out += (2.0 * kappa) * (a * rho * ad);
    return out;
  }
};

Matrix rk4_run(const Liouvillian& l, const Matrix& rho0, const TimeGrid& grid, int substeps,
               std::vector<Matrix>* samples) {
  Matrix rho = rho0;
  if (samples) samples->push_back(rho);
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double h = (grid[k + 1] - grid[k]) / substeps;
    for (int s = 0; s < substeps; ++s) {
      const Matrix k1 = l(rho);
      const Matrix k2 = l(rho + (0.5 * h) * k1);
      const Matrix k3 = l(rho + (0.5 * h) * k2);
      const Matrix k4 = l(rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      rho = 0.5 * (rho + rho.adjoint()).eval();
    }
    if (samples) samples->push_back(rho);
  }
  return rho;
}

}  // namespace

EvolutionResult evolve_lindblad(const Operator& h, const DensityMatrix& rho0, double kappa,
                                const ModeSpace& space, const TimeGrid& grid,
                                const StepControl& control, std::string label) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("evolve_lindblad: kappa must be >= 0");
  if (h.dim() != space.joint_dim() || rho0.dim() != space.joint_dim()) {
    throw std::invalid_argument("evolve_lindblad: operands do not match the mode space");
  }
  require_hermitian(h, "evolve_lindblad");
  const Operator a = fock::embed(fock::annihilation(space.n_a(), Mode::a), space);
  const Matrix n_a = a.matrix().adjoint() * a.matrix();
  const cplx i(0.0, 1.0);
  const Liouvillian l{h.matrix() - i * kappa * n_a, a.matrix(), a.matrix().adjoint(), kappa};

  int n = control.substeps;
  if (n <= 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    const double spread = solver.eigenvalues().maxCoeff() - solver.eigenvalues().minCoeff();
    const double rate = spread + 4.0 * kappa * space.n_a();
    double dt_max = 0.0;
    for (int k = 0; k < grid.n_steps(); ++k) dt_max = std::max(dt_max, grid[k + 1] - grid[k]);
    n = std::max(1, static_cast<int>(std::ceil(dt_max * rate / 0.05)));
  }

  std::vector<Matrix> samples;
  const Matrix coarse = rk4_run(l, rho0.matrix(), grid, n, &samples);
  EvolutionResult res{grid, {}, {}, std::move(label), {}};
  res.diagnostics.substeps = n;
  if (control.self_check) {
    const Matrix fine = rk4_run(l, rho0.matrix(), grid, 2 * n, nullptr);
    const double dev = (fine - coarse).cwiseAbs().maxCoeff();
    res.diagnostics.self_check_deviation = dev;
    if (dev > control.tolerance) {
      // RK4: error ~ n^-4.
      const int rec = static_cast<int>(std::ceil(n * std::pow(dev / control.tolerance, 0.25) * 1.5));
      std::ostringstream msg;
      msg << "evolve_lindblad: halving the step changed the final state by " << dev << " (> "
          << control.tolerance << "); use at least " << rec << " substeps per sample interval";
      throw EvolutionError(msg.str(), rec);
    }
  }

  for (std::size_t k = 0; k < samples.size(); ++k) {
    Matrix& m = samples[k];
    const double drift = std::abs(m.trace() - cplx(1.0));
    res.diagnostics.norm_drift.push_back(drift);
    if (drift > DensityMatrix::kTraceTolerance) {
      throw EvolutionError("evolve_lindblad: trace drift " + std::to_string(drift));
    }
    DensityMatrix rho(std::move(m), DensityMatrix::Check::structural);
    const double lo = rho.min_eigenvalue();
    res.diagnostics.min_eigenvalue.push_back(lo);
    res.diagnostics.purity.push_back(rho.purity());
    if (lo < -1e-8) {
      std::ostringstream msg;
      msg << "min eigenvalue " << lo << " at t = " << grid[k];
      res.diagnostics.warnings.push_back(msg.str());
    }
    res.mixed.push_back(std::move(rho));
  }
  return res;
}

}  // namespace mechsim
