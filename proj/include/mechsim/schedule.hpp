// Time-dependent coupling g0(t): constant, or samples with linear interpolation.
#pragma once

#include <utility>
#include <vector>

namespace mechsim {

class CouplingSchedule {
 public:
  static CouplingSchedule constant(double g0);
  /// Sample times must be strictly increasing (at least two samples).
  static CouplingSchedule sampled(std::vector<double> times, std::vector<double> values);
  /// g0(t) = g_start + (g_end - g_start) (t - t0) / (t1 - t0) on [t0, t1].
  static CouplingSchedule linear_ramp(double t0, double t1, double g_start, double g_end);

  bool is_constant() const { return times_.empty(); }
  /// Throws std::out_of_range outside the sampled interval (ends get 1e-12 relative slack).
  double operator()(double t) const;
  bool covers(double t0, double t1) const;
  double max_abs() const;

  /// Interior sample times (kinks of the interpolant), useful as quadrature breakpoints.
  std::vector<double> knots() const;
  double constant_value() const { return value_; }

 private:
  CouplingSchedule() = default;
  double value_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

}  // namespace mechsim
