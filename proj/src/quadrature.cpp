#include "mechsim/quadrature.hpp"

namespace mechsim {

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::vector<double> breaks, const QuadratureOptions& opt) {
  if (a == b) return 0.0;
  return integrate_simpson<double>(f, a, b, [](double v) { return std::abs(v); },
                                   std::move(breaks), opt);
}

}  // namespace mechsim
