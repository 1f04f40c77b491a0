#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "mechsim/kernels/wigner.hpp"

namespace mechsim::kernels {

const char* to_string(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend best_backend() {
  const char* env = std::getenv("MECH_SIM_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Backend::scalar;
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

void wigner_points(Backend backend, const std::complex<double>* rho, int dim, const double* x,
                   const double* p, double* out, std::size_t n_points) {
  if (backend == Backend::avx2) {
    if (!avx2_supported()) throw std::runtime_error("AVX2 backend requested but not supported");
    wigner_points_avx2(rho, dim, x, p, out, n_points);
  } else {
    wigner_points_scalar(rho, dim, x, p, out, n_points);
  }
}

}  // namespace mechsim::kernels
