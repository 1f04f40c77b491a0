#include "mechsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mechsim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void PhysicalParams::validate() const {
  require(finite(omega_m) && omega_m > 0.0, "omega_m must be > 0");
  require(finite(g_quad) && g_quad >= 0.0, "g_quad must be >= 0");
  require(finite(kappa) && kappa >= 0.0, "kappa must be >= 0");
  require(finite(gamma_m) && gamma_m >= 0.0, "gamma_m must be >= 0");
  require(finite(temperature) && temperature >= 0.0, "temperature must be >= 0");
  require(finite(delta), "delta must be finite");
  require(finite(drive.real()) && finite(drive.imag()), "drive must be finite");
  if (mass) require(*mass > 0.0, "mass must be > 0");
  if (omega_c) require(*omega_c > 0.0, "omega_c must be > 0");
}

double quadratic_coupling_from_gtilde(double g_tilde, double mass, double omega_m) {
  require(mass > 0.0 && omega_m > 0.0, "mass and omega_m must be > 0");
  return kHbar * g_tilde / (2.0 * mass * omega_m);
}

void FrameRates::validate() const {
  require(finite(omega_m) && omega_m > 0.0, "Omega_m must be > 0");
  require(finite(omega_c), "Omega_c must be finite");
  require(finite(g0), "g0 must be finite");
  require(finite(g) && g >= 0.0, "g must be finite and >= 0");
}

// ---------------------------------------------------------------------------
// Frame

DerivedFrame frame_at_mean_field(const PhysicalParams& params, double alpha) {
  params.validate();
  require(alpha >= 0.0, "frame_at_mean_field: alpha must be >= 0");
  const double g = params.g_quad;
  const double wm = params.omega_m;
  const double n = alpha * alpha;

  DerivedFrame f;
  f.alpha = alpha;
  f.g_bare = g;
  f.omega_m = std::sqrt(wm * wm + 2.0 * g * wm * n);
  f.r = -0.5 * std::atanh(g * n / (wm + g * n));
  // Exact squeezing factor: the quadrature x^2 scales by e^{2r} = omega_m / Omega_m.
  const double e2r = wm / f.omega_m;
  f.omega_c = -params.delta + 0.5 * g * e2r;
  f.g = g * e2r;
  f.g0 = f.g * alpha;
  f.omega_c_uncorrected = -params.delta + 0.5 * g * std::sqrt(wm / (wm + g * n));
  f.g0_uncorrected = g * alpha;
  return f;
}

cplx drive_for_mean_field(const PhysicalParams& params, double alpha) {
  const DerivedFrame f = frame_at_mean_field(params, alpha);
  return -alpha * cplx(f.omega_c, -params.kappa);
}

cplx classical_drift_residual(const DerivedFrame& frame, const PhysicalParams& params, cplx alpha) {
  const cplx i(0.0, 1.0);
  const cplx eps = params.drive * std::polar(1.0, -frame.drive_phase);
  return (-i * frame.omega_c - params.kappa) * alpha - i * eps;
}

cplx classical_drift_residual(const DerivedFrame& frame, const PhysicalParams& params) {
  return classical_drift_residual(frame, params, cplx(frame.alpha, 0.0));
}

DerivedFrame solve_frame(const PhysicalParams& params) {
  params.validate();
  const double eps_abs = std::abs(params.drive);
  const double wm = params.omega_m;
  const double g = params.g_quad;
  auto omega_c_of = [&](double x) {
    return -params.delta + 0.5 * g * wm / std::sqrt(wm * wm + 2.0 * g * wm * x * x);
  };
  auto denom = [&](double x) { return std::abs(cplx(omega_c_of(x), -params.kappa)); };

  constexpr int kMaxIterations = 10000;
  constexpr int kDivergenceRun = 100;
  double x = 0.0;
  double last_step = 0.0;
  bool damped = false;
  int growth_run = 0;
  int it = 0;
  bool converged = eps_abs == 0.0;
  for (; !converged && it < kMaxIterations; ++it) {
    const double d = denom(x);
    if (!(d > 0.0)) {
      throw FrameError("no stable mean field at these parameters (Omega_c - i kappa vanishes)");
    }
    double next = eps_abs / d;
    double step = next - x;
    if (!damped && it > 1 && step * last_step < 0.0 && std::abs(step) >= std::abs(last_step)) {
      damped = true;
    }
    if (damped) {
      next = 0.5 * (next + x);
      step = next - x;
    }
    growth_run = step > 0.0 ? growth_run + 1 : 0;
    x = next;
    if (std::abs(step) <= 1e-13 * std::max(x, 1e-300)) converged = true;
    if (!converged && growth_run >= kDivergenceRun) {
      throw FrameError("no stable mean field at these parameters (|alpha| grew for " +
                       std::to_string(kDivergenceRun) + " consecutive iterations)");
    }
    last_step = step;
  }

  DerivedFrame f = frame_at_mean_field(params, 0.0);
  double phase = 0.0;
  if (eps_abs > 0.0) {
    const cplx alpha_c = -params.drive / cplx(omega_c_of(x), -params.kappa);
    phase = std::arg(alpha_c);
    f = frame_at_mean_field(params, std::abs(alpha_c));
  }
  f.drive_phase = phase;
  f.drive_rotated = params.drive * std::polar(1.0, -phase);
  f.iterations = it;
  f.residual = std::abs(cplx(f.alpha, 0.0) * cplx(f.omega_c, -params.kappa) + f.drive_rotated);
  const double tol = eps_abs > 0.0 ? 1e-12 * eps_abs : 1e-15;
  if (!converged || f.residual > tol) {
    std::ostringstream msg;
    msg << "mean-field iteration did not converge after " << it
        << " iterations (last residual " << f.residual << ")";
    throw FrameError(msg.str());
  }
  return f;
}

// ---------------------------------------------------------------------------
// Hamiltonians

Operator assemble(const TermList& terms, const ModeSpace& space) {
  Operator h = Operator::zero(SpaceTag::joint, space.joint_dim());
  for (const auto& t : terms) h += fock::tensor(t.on_a, t.on_b, space);
  return h;
}

namespace {

struct Ladders {
  Operator a, ad, na, ia;
  Operator b, bd, nb, ib;
};

Ladders ladders(const ModeSpace& space) {
  const Operator a = fock::annihilation(space.n_a(), Mode::a);
  const Operator b = fock::annihilation(space.n_b(), Mode::b);
  return {a,
          a.adjoint(),
          fock::number(space.n_a(), Mode::a),
          fock::identity(space.n_a(), Mode::a),
          b,
          b.adjoint(),
          fock::number(space.n_b(), Mode::b),
          fock::identity(space.n_b(), Mode::b)};
}

Operator symmetrized(Operator h) {
  return cplx(0.5) * (h + h.adjoint());
}

}  // namespace

TermList full_hamiltonian_terms(const PhysicalParams& params, const ModeSpace& space) {
  params.validate();
  const Ladders l = ladders(space);
  const Operator b2 = l.b * l.b + l.bd * l.bd;
  const Operator quad = l.nb + cplx(0.5) * (b2 + l.ib);
  TermList terms;
  terms.push_back({cplx(-params.delta) * l.na, l.ib});
  terms.push_back({l.ia, cplx(params.omega_m) * l.nb});
  terms.push_back({std::conj(params.drive) * l.a + params.drive * l.ad, l.ib});
  terms.push_back({cplx(params.g_quad) * l.na, quad});
  return terms;
}

Operator build_H_full(const PhysicalParams& params, const ModeSpace& space) {
  return symmetrized(assemble(full_hamiltonian_terms(params, space), space));
}

Operator build_H_MO(const FrameRates& rates, const ModeSpace& space) {
  rates.validate();
  const Ladders l = ladders(space);
  const Operator h = cplx(rates.omega_c) * fock::tensor(l.na, l.ib, space) +
                     cplx(rates.omega_m) * fock::tensor(l.ia, l.nb, space) +
                     cplx(rates.g0) * fock::tensor(l.a + l.ad, l.nb, space);
  return symmetrized(h);
}

Operator build_H_aux(const FrameRates& rates, const ModeSpace& space) {
  rates.validate();
  const Ladders l = ladders(space);
  return symmetrized(cplx(0.5 * rates.g0) *
                     fock::tensor(l.a + l.ad, l.b * l.b + l.bd * l.bd, space));
}

Operator build_H_small(const FrameRates& rates, const ModeSpace& space) {
  rates.validate();
  const Ladders l = ladders(space);
  const Operator mech = l.nb + cplx(0.5) * (l.b * l.b + l.bd * l.bd);
  return symmetrized(cplx(rates.g) * fock::tensor(l.na, mech, space));
}

Operator build_H_DS(const FrameRates& rates, const ModeSpace& space, bool include_small) {
  Operator h = build_H_MO(rates, space) + build_H_aux(rates, space);
  if (include_small) h += build_H_small(rates, space);
  return h;
}

// ---------------------------------------------------------------------------
// Transforms

Matrix expm_antihermitian(const Matrix& m) {
  const cplx i(0.0, 1.0);
  Matrix h = -i * m;
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("expm_antihermitian: eigendecomposition failed");
  }
  const Matrix& v = solver.eigenvectors();
  Vector phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::polar(1.0, solver.eigenvalues()(k));
  return v * phases.asDiagonal() * v.adjoint();
}

Operator displacement_op(cplx amplitude, int dim, Mode mode) {
  const Operator a = fock::annihilation(dim, mode);
  const Matrix gen = amplitude * a.matrix().adjoint() - std::conj(amplitude) * a.matrix();
  return {a.tag(), expm_antihermitian(gen)};
}

Operator squeezing_op(cplx z, int dim, Mode mode) {
  const Operator b = fock::annihilation(dim, mode);
  const Matrix b2 = b.matrix() * b.matrix();
  const Matrix gen = -0.5 * (std::conj(z) * b2 - z * b2.adjoint());
  return {b.tag(), expm_antihermitian(gen)};
}

ConjugationDeviation frame_conjugation_check(const PhysicalParams& params, const ModeSpace& space,
                                             int keep_a, int keep_b, bool uncorrected) {
  if (keep_a < 2 || keep_b < 2 || keep_a > space.n_a() || keep_b > space.n_b()) {
    throw std::invalid_argument("frame_conjugation_check: invalid interior block");
  }
  const DerivedFrame frame = solve_frame(params);
  PhysicalParams rotated = params;
  rotated.drive = frame.drive_rotated;
  rotated.kappa = 0.0;

  const Matrix d = displacement_op(cplx(frame.alpha, 0.0), space.n_a(), Mode::a).matrix();
  const Matrix s = squeezing_op(cplx(frame.r, 0.0), space.n_b(), Mode::b).matrix();
  const ModeSpace inner(keep_a, keep_b);
  Matrix conj = Matrix::Zero(inner.joint_dim(), inner.joint_dim());
  for (const auto& term : full_hamiltonian_terms(rotated, space)) {
    const Matrix a = (d.adjoint() * term.on_a.matrix() * d).topLeftCorner(keep_a, keep_a);
    const Matrix b = (s.adjoint() * term.on_b.matrix() * s).topLeftCorner(keep_b, keep_b);
    conj += fock::tensor({SpaceTag::mode_a, a}, {SpaceTag::mode_b, b}, inner).matrix();
  }

  FrameRates rates = frame.rates();
  if (uncorrected) rates = {frame.omega_c_uncorrected, frame.omega_m, frame.g0_uncorrected, frame.g_bare};
  const Matrix h_ds = build_H_DS(rates, inner, true).matrix();
  Matrix diff = conj - h_ds;
  ConjugationDeviation out;
  out.offset = diff.diagonal().real().mean();
  diff.diagonal().array() -= out.offset;
  out.deviation = diff.cwiseAbs().maxCoeff();
  out.scale = h_ds.cwiseAbs().maxCoeff();
  return out;
}

// ---------------------------------------------------------------------------
// Presets

PhysicalParams preset(const std::string& name) {
  constexpr double two_pi = 2.0 * kPi;
  PhysicalParams p;
  if (name == "mechanics") {
    p.omega_m = two_pi * 140e3;
    p.gamma_m = two_pi * 1.4e-3;
    p.temperature = 0.5;
    p.kappa = two_pi * 70e3;
    p.g_quad = 5.2e-4;
  } else if (name == "cqed") {
    p.omega_m = two_pi * 300e6;
    p.gamma_m = two_pi * 17e3;
    p.temperature = 0.01;
    p.kappa = two_pi * 330e3;
    p.g_quad = 19e3;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (known: mechanics, cqed)");
  }
  return p;
}

std::vector<std::string> preset_names() { return {"mechanics", "cqed"}; }

double squeezing_from_dB(double dB) {
  require(dB >= 0.0, "squeezing_from_dB: dB must be >= 0");
  return 0.5 * std::log(std::pow(10.0, dB / 10.0));
}

}  // namespace mechsim
