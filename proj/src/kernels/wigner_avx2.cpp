#include <cmath>
#include <numbers>
#include <vector>

#include "mechsim/kernels/wigner.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define MECHSIM_HAVE_X86 1
#endif

namespace mechsim::kernels {

#ifdef MECHSIM_HAVE_X86

namespace {

struct alignas(32) Lane4 {
  double v[4];
};

// (ar + i ai) * (br + i bi)
__attribute__((target("avx2,fma"))) inline void cmul(__m256d ar, __m256d ai, __m256d br,
                                                      __m256d bi, __m256d& re, __m256d& im) {
  re = _mm256_fmsub_pd(ar, br, _mm256_mul_pd(ai, bi));
  im = _mm256_fmadd_pd(ar, bi, _mm256_mul_pd(ai, br));
}

// Re(rho * w) for a scalar rho broadcast over four lanes.
__attribute__((target("avx2,fma"))) inline __m256d re_prod(std::complex<double> rho, __m256d wr,
                                                           __m256d wi) {
  return _mm256_fmsub_pd(_mm256_set1_pd(rho.real()), wr,
                         _mm256_mul_pd(_mm256_set1_pd(rho.imag()), wi));
}

__attribute__((target("avx2,fma"))) void block4(const std::complex<double>* rho, int dim,
                                                const double* x, const double* p, double* out,
                                                Lane4* wr, Lane4* wi, const double* sq,
                                                const double* inv_sq) {
  const __m256d half_sqrt2 = _mm256_set1_pd(1.0 / std::numbers::sqrt2);
  const __m256d ar = _mm256_mul_pd(_mm256_loadu_pd(x), half_sqrt2);
  const __m256d ai = _mm256_mul_pd(_mm256_loadu_pd(p), half_sqrt2);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d a2r = _mm256_mul_pd(two, ar);
  const __m256d a2i = _mm256_mul_pd(two, ai);
  const __m256d ac2i = _mm256_sub_pd(_mm256_setzero_pd(), a2i);

  // exp(-2|A|^2)/pi per lane; the exponential stays scalar.
  alignas(32) double r2[4];
  _mm256_store_pd(r2, _mm256_fmadd_pd(ar, ar, _mm256_mul_pd(ai, ai)));
  for (int l = 0; l < 4; ++l) wr[0].v[l] = std::exp(-2.0 * r2[l]) / std::numbers::pi;
  __m256d w0r = _mm256_load_pd(wr[0].v);
  __m256d w0i = _mm256_setzero_pd();
  _mm256_store_pd(wi[0].v, w0i);

  __m256d acc = _mm256_mul_pd(_mm256_set1_pd(rho[0].real()), w0r);
  __m256d pr = w0r, pi = w0i;
  for (int n = 1; n < dim; ++n) {
    __m256d tr, ti;
    cmul(a2r, a2i, pr, pi, tr, ti);
    const __m256d s = _mm256_set1_pd(inv_sq[n]);
    pr = _mm256_mul_pd(tr, s);
    pi = _mm256_mul_pd(ti, s);
    _mm256_store_pd(wr[n].v, pr);
    _mm256_store_pd(wi[n].v, pi);
    acc = _mm256_fmadd_pd(two, re_prod(rho[n], pr, pi), acc);
  }
  for (int m = 1; m < dim; ++m) {
    __m256d temp_r = _mm256_load_pd(wr[m].v);
    __m256d temp_i = _mm256_load_pd(wi[m].v);
    const __m256d sm = _mm256_set1_pd(sq[m]);
    const __m256d ism = _mm256_set1_pd(inv_sq[m]);
    __m256d tr, ti;
    cmul(a2r, ac2i, temp_r, temp_i, tr, ti);
    __m256d cur_r = _mm256_mul_pd(_mm256_fnmadd_pd(sm, _mm256_load_pd(wr[m - 1].v), tr), ism);
    __m256d cur_i = _mm256_mul_pd(_mm256_fnmadd_pd(sm, _mm256_load_pd(wi[m - 1].v), ti), ism);
    _mm256_store_pd(wr[m].v, cur_r);
    _mm256_store_pd(wi[m].v, cur_i);
    acc = _mm256_add_pd(acc, re_prod(rho[m * dim + m], cur_r, cur_i));
    __m256d prev_r = cur_r, prev_i = cur_i;
    for (int n = m + 1; n < dim; ++n) {
      cmul(a2r, a2i, prev_r, prev_i, tr, ti);
      const __m256d isn = _mm256_set1_pd(inv_sq[n]);
      const __m256d nr = _mm256_mul_pd(_mm256_fnmadd_pd(sm, temp_r, tr), isn);
      const __m256d ni = _mm256_mul_pd(_mm256_fnmadd_pd(sm, temp_i, ti), isn);
      temp_r = _mm256_load_pd(wr[n].v);
      temp_i = _mm256_load_pd(wi[n].v);
      _mm256_store_pd(wr[n].v, nr);
      _mm256_store_pd(wi[n].v, ni);
      acc = _mm256_fmadd_pd(two, re_prod(rho[m * dim + n], nr, ni), acc);
      prev_r = nr;
      prev_i = ni;
    }
  }
  _mm256_storeu_pd(out, acc);
}

}  // namespace

void wigner_points_avx2(const std::complex<double>* rho, int dim, const double* x,
                        const double* p, double* out, std::size_t n_points) {
  std::vector<Lane4> wr(dim), wi(dim);
  std::vector<double> sq(dim + 1), inv_sq(dim + 1, 0.0);
  for (int k = 0; k <= dim; ++k) {
    sq[k] = std::sqrt(double(k));
    if (k > 0) inv_sq[k] = 1.0 / sq[k];
  }
  std::size_t i = 0;
  for (; i + 4 <= n_points; i += 4) {
    block4(rho, dim, x + i, p + i, out + i, wr.data(), wi.data(), sq.data(), inv_sq.data());
  }
  if (i < n_points) wigner_points_scalar(rho, dim, x + i, p + i, out + i, n_points - i);
}

#else

void wigner_points_avx2(const std::complex<double>* rho, int dim, const double* x,
                        const double* p, double* out, std::size_t n_points) {
  wigner_points_scalar(rho, dim, x, p, out, n_points);
}

#endif

}  // namespace mechsim::kernels
