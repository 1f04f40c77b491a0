#include "mechsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mechsim {

const char* to_string(Mode mode) { return mode == Mode::a ? "a" : "b"; }

const char* to_string(SpaceTag tag) {
  switch (tag) {
    case SpaceTag::mode_a: return "mode-a";
    case SpaceTag::mode_b: return "mode-b";
    case SpaceTag::joint: return "joint";
  }
  return "?";
}

namespace {

SpaceTag tag_of(Mode mode) { return mode == Mode::a ? SpaceTag::mode_a : SpaceTag::mode_b; }

void require_mode_dim(int dim) {
  if (dim < 2) {
    throw std::invalid_argument("Fock truncation dimension must be >= 2, got " +
                                std::to_string(dim));
  }
}

}  // namespace

ModeSpace::ModeSpace(int n_a, int n_b) : n_a_(n_a), n_b_(n_b) {
  if (n_a < 2 || n_b < 2) {
    throw std::invalid_argument("ModeSpace requires n_a >= 2 and n_b >= 2 (got " +
                                std::to_string(n_a) + ", " + std::to_string(n_b) + ")");
  }
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(SpaceTag tag, Matrix entries) : tag_(tag), m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw std::invalid_argument("Operator matrix must be square and non-empty");
  }
}

Operator Operator::identity(SpaceTag tag, int dim) {
  return {tag, Matrix::Identity(dim, dim)};
}

Operator Operator::zero(SpaceTag tag, int dim) { return {tag, Matrix::Zero(dim, dim)}; }

double Operator::hermiticity_defect() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

bool Operator::is_hermitian(double tol) const {
  return hermiticity_defect() <= tol * std::max(1.0, max_abs());
}

double Operator::max_abs() const { return m_.cwiseAbs().maxCoeff(); }

void Operator::check_compatible(const Operator& rhs, const char* op) const {
  if (tag_ != rhs.tag_ || dim() != rhs.dim()) {
    std::ostringstream msg;
    msg << "Operator " << op << ": incompatible operands (" << to_string(tag_) << ", dim "
        << dim() << ") vs (" << to_string(rhs.tag_) << ", dim " << rhs.dim() << ")";
    throw std::invalid_argument(msg.str());
  }
}

Operator& Operator::operator+=(const Operator& rhs) {
  check_compatible(rhs, "+");
  m_ += rhs.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  check_compatible(rhs, "-");
  m_ -= rhs.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  lhs.check_compatible(rhs, "*");
  return {lhs.tag_, lhs.m_ * rhs.m_};
}

Operator commutator(const Operator& x, const Operator& y) { return x * y - y * x; }

// ---------------------------------------------------------------------------
// States

PureState::PureState(Vector amplitudes) : v_(std::move(amplitudes)) {
  if (v_.size() == 0) throw std::invalid_argument("PureState: empty amplitude vector");
  const double defect = std::abs(v_.squaredNorm() - 1.0);
  if (!(defect <= kNormTolerance)) {
    throw std::invalid_argument("PureState: squared norm deviates from 1 by " +
                                std::to_string(defect));
  }
}

PureState PureState::normalized(Vector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw std::invalid_argument("PureState: cannot normalize zero vector");
  amplitudes /= n;
  return PureState(std::move(amplitudes));
}

PureState PureState::basis(int dim, int n) {
  if (n < 0 || n >= dim) throw std::out_of_range("PureState::basis: index out of range");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return PureState(std::move(v));
}

double PureState::expectation(const Operator& op) const {
  if (op.dim() != dim()) throw std::invalid_argument("expectation: dimension mismatch");
  return v_.dot(op.matrix() * v_).real();
}

PureState PureState::applied(const Matrix& unitary) const {
  if (unitary.cols() != v_.size()) throw std::invalid_argument("applied: dimension mismatch");
  return PureState::normalized(unitary * v_);
}

DensityMatrix::DensityMatrix(Matrix entries, Check check) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw std::invalid_argument("DensityMatrix must be square and non-empty");
  }
  if (hermiticity_defect() > kHermitianTolerance) {
    throw std::invalid_argument("DensityMatrix is not Hermitian (defect " +
                                std::to_string(hermiticity_defect()) + ")");
  }
  if (trace_defect() > kTraceTolerance) {
    throw std::invalid_argument("DensityMatrix trace deviates from 1 by " +
                                std::to_string(trace_defect()));
  }
  if (check == Check::full) {
    const double lo = min_eigenvalue();
    if (lo < -kPositivityTolerance) {
      throw std::invalid_argument("DensityMatrix has negative eigenvalue " + std::to_string(lo));
    }
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  const Vector& v = psi.amplitudes();
  Matrix rho = v * v.adjoint();
  return DensityMatrix(std::move(rho), Check::structural);
}

double DensityMatrix::trace_defect() const { return std::abs(m_.trace() - cplx(1.0)); }

double DensityMatrix::hermiticity_defect() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

double DensityMatrix::expectation(const Operator& op) const {
  if (op.dim() != dim()) throw std::invalid_argument("expectation: dimension mismatch");
  return (m_ * op.matrix()).trace().real();
}

// ---------------------------------------------------------------------------
// Builders

namespace fock {

Operator identity(int dim, Mode mode) {
  require_mode_dim(dim);
  return Operator::identity(tag_of(mode), dim);
}

Operator annihilation(int dim, Mode mode) {
  require_mode_dim(dim);
  Matrix m = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {tag_of(mode), std::move(m)};
}

Operator creation(int dim, Mode mode) { return annihilation(dim, mode).adjoint(); }

Operator number(int dim, Mode mode) {
  require_mode_dim(dim);
  Matrix m = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) m(n, n) = static_cast<double>(n);
  return {tag_of(mode), std::move(m)};
}

Quadratures position_momentum(int dim, double mass, double omega, Mode mode) {
  if (!(mass > 0.0) || !(omega > 0.0)) {
    throw std::invalid_argument("position_momentum: mass and frequency must be positive");
  }
  const Operator b = annihilation(dim, mode);
  const Operator bd = b.adjoint();
  const double x0 = std::sqrt(1.0 / (2.0 * mass * omega));
  const double p0 = std::sqrt(mass * omega / 2.0);
  return {(b + bd) * cplx(x0), (b - bd) * cplx(0.0, -p0)};
}

Operator tensor(const Operator& on_a, const Operator& on_b, const ModeSpace& space) {
  if (on_a.tag() == SpaceTag::joint || on_b.tag() == SpaceTag::joint) {
    throw std::invalid_argument("tensor: operands must be single-mode operators");
  }
  if (on_a.dim() != space.n_a() || on_b.dim() != space.n_b()) {
    throw std::invalid_argument("tensor: operand dimensions (" + std::to_string(on_a.dim()) +
                                ", " + std::to_string(on_b.dim()) +
                                ") do not match the mode space");
  }
  const int na = space.n_a();
  const int nb = space.n_b();
  const Matrix& x = on_a.matrix();
  const Matrix& y = on_b.matrix();
  Matrix out(na * nb, na * nb);
  for (int j = 0; j < na; ++j) {
    for (int jp = 0; jp < na; ++jp) {
      out.block(j * nb, jp * nb, nb, nb) = x(j, jp) * y;
    }
  }
  return {SpaceTag::joint, std::move(out)};
}

Operator embed(const Operator& single_mode, const ModeSpace& space) {
  switch (single_mode.tag()) {
    case SpaceTag::mode_a: return tensor(single_mode, identity(space.n_b(), Mode::b), space);
    case SpaceTag::mode_b: return tensor(identity(space.n_a(), Mode::a), single_mode, space);
    case SpaceTag::joint: break;
  }
  if (single_mode.dim() != space.joint_dim()) {
    throw std::invalid_argument("embed: joint operator does not match the mode space");
  }
  return single_mode;
}

PureState fock_state(int dim, int n) {
  require_mode_dim(dim);
  return PureState::basis(dim, n);
}

PureState product_state(const PureState& on_a, const PureState& on_b, const ModeSpace& space) {
  if (on_a.dim() != space.n_a() || on_b.dim() != space.n_b()) {
    throw std::invalid_argument("product_state: factor dimensions do not match the mode space");
  }
  Vector v(space.joint_dim());
  for (int j = 0; j < space.n_a(); ++j) {
    v.segment(j * space.n_b(), space.n_b()) = on_a[j] * on_b.amplitudes();
  }
  return PureState::normalized(std::move(v));
}

namespace {

// log of the Poisson weight exp(-lambda) lambda^n / n!
double log_poisson(double lambda, int n) {
  if (lambda == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return -lambda + n * std::log(lambda) - std::lgamma(n + 1.0);
}

}  // namespace

double coherent_tail_weight(cplx amplitude, int dim) {
  const double lambda = std::norm(amplitude);
  if (lambda == 0.0) return 0.0;
  double tail = 0.0;
  for (int n = dim;; ++n) {
    const double term = std::exp(log_poisson(lambda, n));
    tail += term;
    if (n > lambda && term < 1e-30 * std::max(tail, 1e-300)) break;
    if (n > dim + 100000) break;
  }
  return tail;
}

int required_coherent_dimension(cplx amplitude, double max_tail) {
  int dim = 2;
  while (coherent_tail_weight(amplitude, dim) >= max_tail) ++dim;
  return dim;
}

PureState coherent_state(cplx amplitude, int dim, double max_tail) {
  require_mode_dim(dim);
  const double tail = coherent_tail_weight(amplitude, dim);
  if (tail >= max_tail) {
    const int need = required_coherent_dimension(amplitude, max_tail);
    std::ostringstream msg;
    msg << "coherent state |" << amplitude << "> loses tail weight " << tail
        << " in dimension " << dim << "; need dimension >= " << need;
    throw TruncationError(msg.str(), need);
  }
  const double lambda = std::norm(amplitude);
  const double phase = std::arg(amplitude);
  Vector v = Vector::Zero(dim);
  for (int n = 0; n < dim; ++n) {
    if (lambda == 0.0) {
      v(n) = n == 0 ? 1.0 : 0.0;
      continue;
    }
    const double mag = std::exp(0.5 * log_poisson(lambda, n));
    v(n) = std::polar(mag, n * phase);
  }
  return PureState::normalized(std::move(v));
}

DensityMatrix partial_trace(const DensityMatrix& rho, Mode keep, const ModeSpace& space) {
  if (rho.dim() != space.joint_dim()) {
    throw std::invalid_argument("partial_trace: density matrix does not match the mode space");
  }
  const int na = space.n_a();
  const int nb = space.n_b();
  const Matrix& m = rho.matrix();
  Matrix out;
  if (keep == Mode::a) {
    out = Matrix::Zero(na, na);
    for (int j = 0; j < na; ++j)
      for (int jp = 0; jp < na; ++jp) out(j, jp) = m.block(j * nb, jp * nb, nb, nb).trace();
  } else {
    out = Matrix::Zero(nb, nb);
    for (int j = 0; j < na; ++j) out += m.block(j * nb, j * nb, nb, nb);
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out), DensityMatrix::Check::structural);
}

DensityMatrix partial_trace(const PureState& psi, Mode keep, const ModeSpace& space) {
  if (psi.dim() != space.joint_dim()) {
    throw std::invalid_argument("partial_trace: state does not match the mode space");
  }
  // Reshape to an n_a x n_b coefficient matrix C; rho_a = C C^dagger, rho_b = C^T C^*.
  const int na = space.n_a();
  const int nb = space.n_b();
  Matrix c(na, nb);
  for (int j = 0; j < na; ++j)
    for (int k = 0; k < nb; ++k) c(j, k) = psi[space.index(j, k)];
  Matrix out = keep == Mode::a ? Matrix(c * c.adjoint()) : Matrix(c.transpose() * c.conjugate());
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out), DensityMatrix::Check::structural);
}

double thermal_occupation(double omega, double temperature) {
  if (!(omega > 0.0)) throw std::invalid_argument("thermal_occupation: omega must be > 0");
  if (!(temperature >= 0.0)) {
    throw std::invalid_argument("thermal_occupation: temperature must be >= 0");
  }
  if (temperature == 0.0) return 0.0;
  const double x = kHbar * omega / (kBoltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double edge_weight(const PureState& psi, const ModeSpace& space, int levels) {
  if (psi.dim() != space.joint_dim()) throw std::invalid_argument("edge_weight: dimension mismatch");
  double w = 0.0;
  for (int j = 0; j < space.n_a(); ++j) {
    for (int k = 0; k < space.n_b(); ++k) {
      if (j >= space.n_a() - levels || k >= space.n_b() - levels) {
        w += std::norm(psi[space.index(j, k)]);
      }
    }
  }
  return w;
}

Matrix interior_block(const Matrix& joint, const ModeSpace& space, int keep_a, int keep_b) {
  if (keep_a <= 0 || keep_b <= 0 || keep_a > space.n_a() || keep_b > space.n_b()) {
    throw std::invalid_argument("interior_block: invalid interior size");
  }
  Matrix out(keep_a * keep_b, keep_a * keep_b);
  for (int j = 0; j < keep_a; ++j)
    for (int jp = 0; jp < keep_a; ++jp)
      out.block(j * keep_b, jp * keep_b, keep_b, keep_b) =
          joint.block(space.index(j, 0), space.index(jp, 0), keep_b, keep_b);
  return out;
}

double interior_max_deviation(const Operator& x, const Operator& y, const ModeSpace& space,
                              int edge_a, int edge_b) {
  if (x.dim() != space.joint_dim() || y.dim() != space.joint_dim()) {
    throw std::invalid_argument("interior_max_deviation: operators do not match the mode space");
  }
  const Matrix diff = x.matrix() - y.matrix();
  return interior_block(diff, space, space.n_a() - edge_a, space.n_b() - edge_b)
      .cwiseAbs()
      .maxCoeff();
}

double interior_max_deviation(const Operator& x, const Operator& y, int edge) {
  if (x.dim() != y.dim()) throw std::invalid_argument("interior_max_deviation: dimension mismatch");
  const int keep = x.dim() - edge;
  if (keep <= 0) throw std::invalid_argument("interior_max_deviation: edge exceeds dimension");
  return (x.matrix() - y.matrix()).topLeftCorner(keep, keep).cwiseAbs().maxCoeff();
}

}  // namespace fock
}  // namespace mechsim
