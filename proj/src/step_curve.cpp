#include "survmae/step_curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "survmae/error.hpp"

namespace survmae {

StepCurve::StepCurve(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.empty() || knots_.size() != values_.size()) {
    throw DomainError("step curve needs equal, nonzero numbers of knots and values");
  }
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (!std::isfinite(knots_[k]) || knots_[k] < 0.0) {
      throw DomainError("step curve knot " + std::to_string(k) + " is negative or not finite");
    }
    if (k > 0 && !(knots_[k] > knots_[k - 1])) {
      throw DomainError("step curve knots must be strictly increasing (knot " + std::to_string(k) + ")");
    }
    if (!(values_[k] >= 0.0 && values_[k] <= 1.0)) {
      throw DomainError("step curve value " + std::to_string(k) + " outside [0,1]");
    }
    if (k > 0 && values_[k] > values_[k - 1]) {
      throw DomainError("step curve values must be non-increasing (value " + std::to_string(k) + ")");
    }
  }
}

double StepCurve::operator()(double t) const {
  if (!(t >= 0.0)) throw DomainError("survival curve evaluated at negative time");
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return 1.0;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepCurve::left_limit(double t) const {
  if (!(t >= 0.0)) throw DomainError("survival curve evaluated at negative time");
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return 1.0;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepCurve::integrate(double a, double b) const {
  if (!(a >= 0.0) || !(b >= a)) throw DomainError("integration bounds must satisfy 0 <= a <= b");
  if (a == b) return 0.0;
  double area = 0.0;
  // Piece before the first knot has value 1.
  if (a < knots_.front()) {
    area += std::min(b, knots_.front()) - a;
  }
  const std::size_t n = knots_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = std::max(a, knots_[k]);
    const double hi = k + 1 < n ? std::min(b, knots_[k + 1]) : b;
    if (hi > lo) area += (hi - lo) * values_[k];
    if (k + 1 < n && knots_[k + 1] >= b) break;
  }
  return area;
}

double step_eval(const StepCurve& curve, double t) { return curve(t); }

double step_integrate(const StepCurve& curve, double a, double b) { return curve.integrate(a, b); }

double curve_median(const StepCurve& curve) {
  const auto values = curve.values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] <= 0.5) return curve.knots()[k];
  }
  const double t_last = curve.last_time();
  const double v_last = curve.last_value();
  if (v_last >= 1.0 || t_last <= 0.0) {
    throw DegenerateCurveError("survival curve never descends; median cannot be extrapolated");
  }
  return 0.5 * t_last / (1.0 - v_last);
}

double curve_mean(const StepCurve& curve) {
  const double t_last = curve.last_time();
  const double v_last = curve.last_value();
  if (v_last >= 1.0) {
    throw DegenerateCurveError("survival curve never descends; mean cannot be extrapolated");
  }
  const double rmst = curve.integrate(0.0, t_last);
  if (v_last <= 0.0) return rmst;
  if (t_last <= 0.0) throw DegenerateCurveError("survival curve has no time extent to extrapolate from");
  const double t_zero = t_last / (1.0 - v_last);
  return rmst + v_last * (t_zero - t_last) / 2.0;
}

}  // namespace survmae
