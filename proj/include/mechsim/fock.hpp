// Operator algebra over truncated two-mode Fock spaces.
//
// Index convention (used by every builder, partial trace and output routine):
// the joint basis state |j>_a (x) |k>_b lives at index j * n_b + k, i.e. the
// photon mode a is the major (slow) index.
#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mechsim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;   // J / K

enum class Mode { a, b };
enum class SpaceTag { mode_a, mode_b, joint };

const char* to_string(Mode mode);
const char* to_string(SpaceTag tag);

/// Raised when a Fock truncation is too small for the requested state.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, int required_dim)
      : std::runtime_error(what), required_dim_(required_dim) {}
  int required_dim() const { return required_dim_; }

 private:
  int required_dim_;
};

class ModeSpace {
 public:
  ModeSpace(int n_a, int n_b);

  int n_a() const { return n_a_; }
  int n_b() const { return n_b_; }
  int dim(Mode mode) const { return mode == Mode::a ? n_a_ : n_b_; }
  int joint_dim() const { return n_a_ * n_b_; }
  int index(int j, int k) const { return j * n_b_ + k; }

  bool operator==(const ModeSpace&) const = default;

 private:
  int n_a_;
  int n_b_;
};

/// Dense complex operator tagged with the space it acts on.
class Operator {
 public:
  Operator(SpaceTag tag, Matrix entries);

  static Operator identity(SpaceTag tag, int dim);
  static Operator zero(SpaceTag tag, int dim);

  SpaceTag tag() const { return tag_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  cplx operator()(int row, int col) const { return m_(row, col); }

  Operator adjoint() const { return {tag_, m_.adjoint()}; }
  double trace_real() const { return m_.trace().real(); }
  cplx trace() const { return m_.trace(); }

  /// max |M - M^dagger| over all entries.
  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-12) const;
  double max_abs() const;

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(cplx s);

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator*(Operator lhs, cplx s) { return lhs *= s; }
  friend Operator operator*(cplx s, Operator rhs) { return rhs *= s; }
  friend Operator operator*(const Operator& lhs, const Operator& rhs);

 private:
  void check_compatible(const Operator& rhs, const char* op) const;

  SpaceTag tag_;
  Matrix m_;
};

Operator commutator(const Operator& x, const Operator& y);

/// Normalized state vector; ||psi||^2 = 1 within 1e-10.
class PureState {
 public:
  explicit PureState(Vector amplitudes);

  static PureState normalized(Vector amplitudes);
  static PureState basis(int dim, int n);

  int dim() const { return static_cast<int>(v_.size()); }
  const Vector& amplitudes() const { return v_; }
  cplx operator[](int i) const { return v_(i); }

  double expectation(const Operator& op) const;
  PureState applied(const Matrix& unitary) const;

  static constexpr double kNormTolerance = 1e-10;

 private:
  Vector v_;
};

class DensityMatrix {
 public:
  /// full: Hermitian, unit trace, and positive within tolerance.
  /// structural: Hermitian and unit trace only (positivity is the caller's concern).
  enum class Check { full, structural };

  explicit DensityMatrix(Matrix entries, Check check = Check::full);

  static DensityMatrix from_pure(const PureState& psi);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double trace_defect() const;
  double hermiticity_defect() const;
  double min_eigenvalue() const;
  double purity() const;
  double expectation(const Operator& op) const;

  static constexpr double kHermitianTolerance = 1e-10;
  static constexpr double kTraceTolerance = 1e-9;
  static constexpr double kPositivityTolerance = 1e-9;

 private:
  Matrix m_;
};

namespace fock {

Operator identity(int dim, Mode mode = Mode::a);
Operator annihilation(int dim, Mode mode = Mode::a);
Operator creation(int dim, Mode mode = Mode::a);
Operator number(int dim, Mode mode = Mode::a);

struct Quadratures {
  Operator position;
  Operator momentum;
};

/// x = sqrt(1/(2 m w)) (b + b^dagger), p = -i sqrt(m w / 2) (b - b^dagger) with hbar = 1.
Quadratures position_momentum(int dim, double mass, double omega, Mode mode = Mode::b);

/// Kronecker product in mode-a-major ordering.
Operator tensor(const Operator& on_a, const Operator& on_b, const ModeSpace& space);

/// on_a (x) I_b or I_a (x) on_b depending on the operator's tag.
Operator embed(const Operator& single_mode, const ModeSpace& space);

PureState fock_state(int dim, int n);
PureState product_state(const PureState& on_a, const PureState& on_b, const ModeSpace& space);

/// Weight of a coherent state beyond the first `dim` Fock levels.
double coherent_tail_weight(cplx amplitude, int dim);
int required_coherent_dimension(cplx amplitude, double max_tail = 1e-8);

/// Truncated coherent state, renormalized. Throws TruncationError if the
/// discarded tail weight exceeds max_tail.
PureState coherent_state(cplx amplitude, int dim, double max_tail = 1e-8);

DensityMatrix partial_trace(const DensityMatrix& rho, Mode keep, const ModeSpace& space);
DensityMatrix partial_trace(const PureState& psi, Mode keep, const ModeSpace& space);

/// Bose occupation 1 / (exp(hbar w / kB T) - 1); w in rad/s, T in kelvin.
double thermal_occupation(double omega, double temperature);

/// Probability carried by the top `levels` Fock levels of either mode.
double edge_weight(const PureState& psi, const ModeSpace& space, int levels = 2);

/// Largest entrywise deviation between two joint operators restricted to the
/// interior block j < n_a - edge_a, k < n_b - edge_b.
double interior_max_deviation(const Operator& x, const Operator& y, const ModeSpace& space,
                              int edge_a = 2, int edge_b = 2);

/// Single-mode version: rows/columns below dim - edge.
double interior_max_deviation(const Operator& x, const Operator& y, int edge = 2);

/// Interior block of a joint operator as a dense matrix (rows/cols j < keep_a, k < keep_b).
Matrix interior_block(const Matrix& joint, const ModeSpace& space, int keep_a, int keep_b);

}  // namespace fock
}  // namespace mechsim
