// Closed-form and semi-analytic results for the mechano-optical model:
// Lie-algebraic propagator factorization, the first-order correction E_1 and
// its coefficient functions, the H_MO spectrum and its instability.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mechsim/evolve.hpp"
#include "mechsim/fock.hpp"
#include "mechsim/model.hpp"
#include "mechsim/schedule.hpp"

namespace mechsim {

// ---------------------------------------------------------------------------
// Factorized propagator  U = U_b U_b2 U_a U_+ U_-

struct FCoefficients {
  std::vector<double> t;
  std::vector<double> F_a;
  std::vector<double> F_b;
  std::vector<double> F_b2;          // determining ODE, integrated numerically
  std::vector<double> F_b2_printed;  // -2 g(t)/sqrt(Omega_c Omega_m) sin(Omega_c t) F_+(t)
  std::vector<double> F_plus;
  std::vector<double> F_minus;
};

/// F_+ and F_- by self-converged quadrature; F_b2 from
///   dF_b2/dt = -2 F_+(t) g(t) sin(Omega_c t).
FCoefficients f_coefficients(const FrameRates& rates, const CouplingSchedule& schedule,
                             const TimeGrid& grid);

/// Hermitian generators G_+ = (a + a^dagger) N_b and G_- = i (a^dagger - a) N_b.
Operator generator_G_plus(const ModeSpace& space);
Operator generator_G_minus(const ModeSpace& space);

struct FactorOptions {
  double g_minus_sign = 1.0;  // -1 builds exp(+i F_- G_-); used to check that the test can fail
};

/// The product exp(-i F_b N_b) exp(-i F_b2 N_b^2) exp(-i F_a N_a) exp(-i F_+ G_+) exp(-i F_- G_-).
Operator factored_unitary(double F_a, double F_b, double F_b2, double F_plus, double F_minus,
                          const ModeSpace& space, const FactorOptions& opt = {});

std::vector<Operator> factored_propagator(const FrameRates& rates,
                                          const CouplingSchedule& schedule,
                                          const TimeGrid& grid, const ModeSpace& space,
                                          const FactorOptions& opt = {});

struct CheckEntry {
  std::string name;
  double parameter = 0.0;
  double deviation = 0.0;
};

struct ConjugationReport {
  std::vector<CheckEntry> entries;
  double max_deviation = 0.0;
  double tolerance = 1e-10;
  bool passed() const { return max_deviation <= tolerance; }
};

/// U_a G_+ U_a^dagger = cos F_a G_+ - sin F_a G_-,  U_a G_- U_a^dagger = cos F_a G_- + sin F_a G_+,
/// U_+ G_- U_+^dagger = G_- + 2 F_+ N_b^2, on the interior block.
ConjugationReport conjugation_identities_check(const ModeSpace& space,
                                               std::vector<double> F_a_samples = {0.0, 0.4, kPi / 2, 2.3},
                                               std::vector<double> F_plus_samples = {0.0, 0.1, 0.3},
                                               int keep_a = 10, int keep_b = 4);

// ---------------------------------------------------------------------------
// First-order correction E_1 and the fidelity functions

struct FPM {
  double pp = 0.0;
  double mm = 0.0;
  double pm = 0.0;
  double mp = 0.0;
};

/// Quadrature of the integral definitions, e.g. F_++(t) = (1/2) int_0^t g0 cos(Omega_c t') cos(2 Omega_m t') dt'.
FPM F_pm_functions(const FrameRates& rates, const CouplingSchedule& schedule, double t);
FPM F_pm_functions(const FrameRates& rates, double t);
/// Elementary antiderivatives for constant g0, finite at Omega_- = 0.
FPM F_pm_closed_form(const FrameRates& rates, double t);
/// Closed forms as printed in the literature (no g0 prefactor); NaN at resonance.
FPM F_pm_printed(const FrameRates& rates, double t);

struct RatioLog {
  std::string name;
  double mean_ratio = 0.0;      // quadrature / printed
  double max_spread = 0.0;      // max |ratio - mean| / |mean|
  double expected_ratio = 0.0;  // +-g0/(2 Omega_m)
  int samples = 0;
};

/// Quadrature/printed ratios per function over the given times.
std::vector<RatioLog> F_pm_ratio_log(const FrameRates& rates, const std::vector<double>& times);

/// F_uni(t) = 2 g0^2 sin^2(Omega_+ t / 2) / Omega_+^2, the value of
/// 2 (F_++ - F_--)^2 + 2 (F_+- + F_-+)^2 for constant g0.
double F_uni(const FrameRates& rates, double t);
/// 2 g0^2 [sin^2(Omega_+ t)/Omega_+^2 + sin^4(Omega_- t/2)/(Omega_-^2/4)].
double F_uni_printed(const FrameRates& rates, double t);
/// 2 (F_++ - F_--)^2 + 2 (F_+- + F_-+)^2 from quadrature.
double F_uni_from_pm(const FrameRates& rates, double t);

/// A_+ = a^dagger + a, A_- = -i (a - a^dagger), B_+ = b^dagger^2 + b^2, B_- = -i (b^2 - b^dagger^2).
struct CorrectionOperators {
  Operator A_plus, A_minus, B_plus, B_minus;
};
CorrectionOperators correction_operators(const ModeSpace& space);

struct E1Result {
  Operator by_quadrature;  // (1/2) int g0 (a e^{-i Omega_c t'} + h.c.)(b^2 e^{-2i Omega_m t'} + h.c.) dt'
  Operator by_expansion;   // F_++ A_+B_+ + F_-- A_-B_- + F_+- A_+B_- + F_-+ A_-B_+
  double relative_deviation = 0.0;
};

E1Result E1_operator(const FrameRates& rates, const CouplingSchedule& schedule, double t,
                     const ModeSpace& space);

/// 1 + <E_1>^2 - <E_1^2> for a pure state.
double perturbative_fidelity(const Operator& e1, const PureState& psi0);

// ---------------------------------------------------------------------------
// Spectrum of H_MO

/// lambda_{n,l} = n Omega_c + l Omega_m - l^2 g0^2 / Omega_c.
double mo_eigenvalue(const FrameRates& rates, int n, int l);

struct Eigenstate {
  PureState state;
  double truncated_weight = 0.0;  // weight of D^dagger(l g0/Omega_c)|n> beyond n_a - 2
};

/// D^dagger(l g0 / Omega_c)|n>_a (x) |l>_b, built in a padded space then truncated.
Eigenstate mo_eigenstate(const FrameRates& rates, int n, int l, const ModeSpace& space);

struct SpectrumRow {
  int n = 0;
  int l = 0;
  double analytic = 0.0;
  double numeric = std::numeric_limits<double>::quiet_NaN();
  double abs_err = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  // ||H|lambda> - lambda|lambda>||
  bool fits = false;
  bool unstable = false;  // l >= l_max
};

std::vector<SpectrumRow> spectrum(const FrameRates& rates, int n_max, int l_max);

/// Adds the numerical cross-check (greedy nearest matching against dense
/// diagonalization of H_MO + chi N_b^2) to rows whose eigenstates fit the box.
std::vector<SpectrumRow> spectrum_with_numerics(const FrameRates& rates, int n_max, int l_max,
                                                const ModeSpace& space, double chi = 0.0);

/// Omega_m Omega_c / g0^2; +infinity for g0 = 0.
double instability_threshold(const FrameRates& rates);

struct CureReport {
  double chi = 0.0;
  double l_max = 0.0;
  double analytic_min = 0.0;       // min over n < n_a, l < n_b of lambda + chi l^2
  double numeric_min = 0.0;        // min eigenvalue over the converged subspace
  double numeric_min_uncured = 0.0;
  int converged_states = 0;
};

/// Dense diagonalization of H_MO + chi N_b^2; eigenvectors with weight <= 1e-10 on
/// the top two photon levels count as converged.
CureReport anharmonic_cure_check(const FrameRates& rates, double chi, const ModeSpace& space);

}  // namespace mechsim
