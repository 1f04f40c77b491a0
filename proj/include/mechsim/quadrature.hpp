// Composite Simpson quadrature with panel doubling until self-converged.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mechsim {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
  double tol = 1e-10;  // relative to the integral of |f| over each piece
  int initial_panels = 16;
  int max_panels = 1 << 20;
};

namespace detail {

template <class T, class F, class Norm>
T simpson_fixed(const F& f, double a, double b, int n, const Norm& norm, double& abs_sum) {
  const double h = (b - a) / n;
  T s = f(a) + f(b);
  abs_sum = norm(f(a)) + norm(f(b));
  for (int k = 1; k < n; ++k) {
    const double w = (k % 2) ? 4.0 : 2.0;
    const T v = f(a + k * h);
    s = s + w * v;
    abs_sum += w * norm(v);
  }
  abs_sum *= h / 3.0;
  return (h / 3.0) * s;
}

}  // namespace detail

/// Integral of f over [a, b] split at the given breakpoints; each piece is
/// refined until two successive Simpson estimates agree to tol.
template <class T, class F, class Norm>
T integrate_simpson(const F& f, double a, double b, const Norm& norm,
                    std::vector<double> breaks = {}, const QuadratureOptions& opt = {}) {
  if (!(b >= a)) throw std::invalid_argument("integrate_simpson: need b >= a");
  std::vector<double> edges{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > edges.back() && x < b) edges.push_back(x);
  edges.push_back(b);

  T total{};
  bool first = true;
  for (std::size_t piece = 0; piece + 1 < edges.size(); ++piece) {
    const double lo = edges[piece];
    const double hi = edges[piece + 1];
    if (hi == lo) continue;
    int n = std::max(2, opt.initial_panels + opt.initial_panels % 2);
    double scale = 0.0;
    T prev = detail::simpson_fixed<T>(f, lo, hi, n, norm, scale);
    while (true) {
      n *= 2;
      if (n > opt.max_panels) {
        std::ostringstream msg;
        msg << "quadrature did not converge on [" << lo << ", " << hi << "] with "
            << opt.max_panels << " panels";
        throw QuadratureError(msg.str());
      }
      T next = detail::simpson_fixed<T>(f, lo, hi, n, norm, scale);
      const double diff = norm(next - prev);
      prev = next;
      if (diff <= opt.tol * scale || scale == 0.0) break;
    }
    if (first) {
      total = prev;
      first = false;
    } else {
      total = total + prev;
    }
  }
  return total;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::vector<double> breaks = {}, const QuadratureOptions& opt = {});

}  // namespace mechsim
