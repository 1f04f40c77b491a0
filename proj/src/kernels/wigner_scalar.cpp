#include <cmath>
#include <numbers>
#include <vector>

#include "mechsim/kernels/wigner.hpp"

namespace mechsim::kernels {

// Iterative Laguerre recursion over the Fock expansion, one point at a time.
void wigner_points_scalar(const std::complex<double>* rho, int dim, const double* x,
                          const double* p, double* out, std::size_t n_points) {
  using cplx = std::complex<double>;
  std::vector<cplx> w(dim);
  std::vector<double> sq(dim + 1);
  for (int k = 0; k <= dim; ++k) sq[k] = std::sqrt(double(k));

  for (std::size_t i = 0; i < n_points; ++i) {
    const cplx a = cplx(x[i], p[i]) / std::numbers::sqrt2;
    const cplx ac = std::conj(a);
    w[0] = std::exp(-2.0 * std::norm(a)) / std::numbers::pi;
    double acc = rho[0].real() * w[0].real();
    for (int n = 1; n < dim; ++n) {
      w[n] = 2.0 * a * w[n - 1] / sq[n];
      acc += 2.0 * (rho[n] * w[n]).real();
    }
    for (int m = 1; m < dim; ++m) {
      cplx temp = w[m];
      w[m] = (2.0 * ac * temp - sq[m] * w[m - 1]) / sq[m];
      acc += (rho[m * dim + m] * w[m]).real();
      for (int n = m + 1; n < dim; ++n) {
        const cplx next = (2.0 * a * w[n - 1] - sq[m] * temp) / sq[n];
        temp = w[n];
        w[n] = next;
        acc += 2.0 * (rho[m * dim + n] * w[n]).real();
      }
    }
    out[i] = acc;
  }
}

}  // namespace mechsim::kernels
