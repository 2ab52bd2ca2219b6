#pragma once

#include <span>
#include <vector>

namespace survmae {

/// Right-continuous, non-increasing, piecewise-constant survival curve.
///
/// The value at t is values[k] for the largest k with knots[k] <= t, and 1 before
/// the first knot. Beyond the last knot the curve stays at its last value.
/// Integration and quantile lookup are exact on this representation.
class StepCurve {
 public:
  /// Validates: equal nonzero lengths, strictly increasing nonnegative knots,
  /// values in [0,1] and non-increasing. Throws DomainError otherwise.
  StepCurve(std::vector<double> knots, std::vector<double> values);

  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return knots_.size(); }

  double last_time() const noexcept { return knots_.back(); }
  double last_value() const noexcept { return values_.back(); }

  /// Right-continuous lookup. Throws DomainError for t < 0.
  double operator()(double t) const;
  /// lim_{s -> t-} S(s); equals 1 at or before the first knot when knots[0] > 0.
  double left_limit(double t) const;
  /// Exact area under the curve over [a, b]. Throws DomainError unless 0 <= a <= b.
  double integrate(double a, double b) const;

  bool operator==(const StepCurve&) const = default;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

double step_eval(const StepCurve& curve, double t);
double step_integrate(const StepCurve& curve, double a, double b);

/// Earliest time with S(t) <= 0.5; if the curve never gets there, the time at which
/// the chord through (0, 1) and (t_last, v_last) crosses 0.5.
double curve_median(const StepCurve& curve);

/// Area under the curve to its last knot, plus the triangle under the same chord
/// continued down to zero when the curve has not reached 0.
double curve_mean(const StepCurve& curve);

}  // namespace survmae
