// Physical parameters, the displaced-squeezed frame and the Hamiltonian builders.
//
// Units: hbar = 1, every Hamiltonian is an angular-frequency matrix (rad/s or
// dimensionless if the rates were scaled).
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mechsim/fock.hpp"

namespace mechsim {

struct PhysicalParams {
  std::optional<double> omega_c;  // only delta enters the dynamics
  double omega_m = 0.0;
  std::optional<double> mass;
  double g_quad = 0.0;  // g = hbar g~ / (2 m omega_m)
  cplx drive{0.0, 0.0};
  double delta = 0.0;  // omega_s - omega_c
  double kappa = 0.0;
  double gamma_m = 0.0;  // bookkeeping only
  double temperature = 0.0;

  void validate() const;
};

/// g = hbar g~ / (2 m omega_m) in SI units (g~ in rad/(s m^2), mass in kg).
double quadratic_coupling_from_gtilde(double g_tilde, double mass, double omega_m);

/// Rates of the frame Hamiltonians. g is the coupling of the small term.
struct FrameRates {
  double omega_c = 0.0;
  double omega_m = 0.0;
  double g0 = 0.0;
  double g = 0.0;

  double omega_plus() const { return omega_c + 2.0 * omega_m; }
  double omega_minus() const { return omega_c - 2.0 * omega_m; }
  double epsilon() const { return g0 / omega_m; }
  bool epsilon_warning() const { return std::abs(epsilon()) >= 0.1; }

  void validate() const;
};

struct DerivedFrame {
  double alpha = 0.0;    // real, >= 0 after the phase-reference rotation
  double r = 0.0;        // squeezing parameter, <= 0
  double omega_c = 0.0;  // -delta + (g_bare/2) e^{2r}
  double omega_m = 0.0;  // sqrt(omega_m^2 + 2 g omega_m alpha^2)
  double g0 = 0.0;       // g * alpha
  double g = 0.0;        // coupling after squeezing, g_bare * e^{2r}
  double g_bare = 0.0;
  double drive_phase = 0.0;  // epsilon was multiplied by exp(-i drive_phase)
  cplx drive_rotated{0.0, 0.0};
  double residual = 0.0;
  int iterations = 0;

  /// Values of the textbook expressions Omega_c = -delta + (g/2) sqrt(omega_m/(omega_m + g alpha^2))
  /// and g0 = g_bare * alpha, kept for comparison.
  double omega_c_uncorrected = 0.0;
  double g0_uncorrected = 0.0;

  FrameRates rates() const { return {omega_c, omega_m, g0, g}; }
  /// alpha in the original phase reference of the drive.
  cplx alpha_lab() const { return std::polar(alpha, drive_phase); }
};

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean-field quantities for a given |alpha| (no fixed point involved).
DerivedFrame frame_at_mean_field(const PhysicalParams& params, double alpha);

DerivedFrame solve_frame(const PhysicalParams& params);

/// Drive epsilon = -alpha (Omega_c(alpha) - i kappa) whose mean field is the given real alpha.
cplx drive_for_mean_field(const PhysicalParams& params, double alpha);

/// (-i Omega_c - kappa) alpha - i epsilon in the rotated phase convention.
cplx classical_drift_residual(const DerivedFrame& frame, const PhysicalParams& params);
cplx classical_drift_residual(const DerivedFrame& frame, const PhysicalParams& params, cplx alpha);

/// Joint operator written as a sum of on_a (x) on_b products.
struct TensorTerm {
  Operator on_a;
  Operator on_b;
};
using TermList = std::vector<TensorTerm>;

Operator assemble(const TermList& terms, const ModeSpace& space);

/// Terms of -delta N_a + omega_m N_b + (eps* a + eps a^dagger) + g N_a [N_b + (b^2 + b^dagger^2 + 1)/2].
TermList full_hamiltonian_terms(const PhysicalParams& params, const ModeSpace& space);
Operator build_H_full(const PhysicalParams& params, const ModeSpace& space);

Operator build_H_DS(const FrameRates& rates, const ModeSpace& space, bool include_small);
Operator build_H_MO(const FrameRates& rates, const ModeSpace& space);
Operator build_H_aux(const FrameRates& rates, const ModeSpace& space);
Operator build_H_small(const FrameRates& rates, const ModeSpace& space);

/// Unitary exp(M) for anti-Hermitian M, via the spectrum of the Hermitian -iM.
Matrix expm_antihermitian(const Matrix& m);

/// D(alpha) = exp(alpha a^dagger - alpha* a).
Operator displacement_op(cplx amplitude, int dim, Mode mode = Mode::a);
/// S(z) = exp[-(z* b^2 - z b^dagger^2)/2].
Operator squeezing_op(cplx z, int dim, Mode mode = Mode::b);

struct ConjugationDeviation {
  double deviation = 0.0;  // max |H_conj - H_DS - c I| on the interior block
  double scale = 0.0;      // max |H_DS| on the interior block
  double offset = 0.0;     // c
  double relative() const { return scale > 0.0 ? deviation / scale : deviation; }
};

/// [D(alpha) S(r)]^dagger H_full [D(alpha) S(r)] against H_DS(include_small) at kappa = 0,
/// conjugating each tensor factor separately and comparing on the lowest
/// keep_a x keep_b levels. With `uncorrected` the textbook Omega_c and g0 are used.
ConjugationDeviation frame_conjugation_check(const PhysicalParams& params, const ModeSpace& space,
                                             int keep_a, int keep_b, bool uncorrected = false);

PhysicalParams preset(const std::string& name);
std::vector<std::string> preset_names();

/// |r| = ln(10^(dB/10)) / 2.
double squeezing_from_dB(double dB);

}  // namespace mechsim
