#include "mechsim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mechsim {

CouplingSchedule CouplingSchedule::constant(double g0) {
  if (!std::isfinite(g0)) throw std::invalid_argument("CouplingSchedule: g0 must be finite");
  CouplingSchedule s;
  s.value_ = g0;
  return s;
}

CouplingSchedule CouplingSchedule::sampled(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("CouplingSchedule: need at least two (t, g0) samples of equal count");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("CouplingSchedule: sample times must be strictly increasing");
    }
  }
  CouplingSchedule s;
  s.times_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

CouplingSchedule CouplingSchedule::linear_ramp(double t0, double t1, double g_start, double g_end) {
  return sampled({t0, t1}, {g_start, g_end});
}

double CouplingSchedule::operator()(double t) const {
  if (is_constant()) return value_;
  // Accumulated step sums may overshoot the ends by rounding.
  const double slack = 1e-12 * (times_.back() - times_.front());
  if (t < times_.front() - slack || t > times_.back() + slack) {
    std::ostringstream msg;
    msg << "CouplingSchedule: t = " << t << " outside [" << times_.front() << ", "
        << times_.back() << "]";
    throw std::out_of_range(msg.str());
  }
  t = std::clamp(t, times_.front(), times_.back());
  auto hi = std::upper_bound(times_.begin(), times_.end(), t);
  if (hi == times_.end()) return values_.back();
  const auto k = static_cast<std::size_t>(hi - times_.begin());
  const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  return values_[k - 1] + w * (values_[k] - values_[k - 1]);
}

bool CouplingSchedule::covers(double t0, double t1) const {
  return is_constant() || (t0 >= times_.front() && t1 <= times_.back());
}

double CouplingSchedule::max_abs() const {
  if (is_constant()) return std::abs(value_);
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> CouplingSchedule::knots() const {
  if (times_.size() <= 2) return {};
  return {times_.begin() + 1, times_.end() - 1};
}

}  // namespace mechsim
