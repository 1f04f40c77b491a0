// Wigner function of a single-mode density matrix at scattered phase-space
// points. Convention: A = (x + i p)/sqrt(2), vacuum peak 1/pi, coherent |alpha>
// centered at (sqrt(2) Re alpha, sqrt(2) Im alpha).
//
// Two interchangeable backends: a scalar reference loop and an AVX2 variant
// that evaluates four points per iteration. best_backend() picks AVX2 when the
// CPU supports it unless MECH_SIM_SIMD=scalar is set.
#pragma once

#include <complex>
#include <cstddef>

namespace mechsim::kernels {

enum class Backend { scalar, avx2 };

const char* to_string(Backend b);
bool avx2_supported();
Backend best_backend();

/// rho is dim x dim, row-major: rho[m * dim + n] = <m|rho|n>.
void wigner_points_scalar(const std::complex<double>* rho, int dim, const double* x,
                          const double* p, double* out, std::size_t n_points);
void wigner_points_avx2(const std::complex<double>* rho, int dim, const double* x,
                        const double* p, double* out, std::size_t n_points);
void wigner_points(Backend backend, const std::complex<double>* rho, int dim, const double* x,
                   const double* p, double* out, std::size_t n_points);

}  // namespace mechsim::kernels
