#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "survmae/dataset.hpp"
#include "survmae/step_curve.hpp"

namespace survmae {

// ---------------------------------------------------------------------------
// Kaplan-Meier
// ---------------------------------------------------------------------------

struct KmRow {
  double time = 0.0;          ///< distinct event time t_k
  std::size_t at_risk = 0;    ///< n_k: subjects with observed time >= t_k
  std::size_t events = 0;     ///< d_k
};

/// Product-limit fit with its count table.
///
/// The curve has a knot at 0 (value 1), one knot per distinct event time, and a
/// terminal knot at the largest observed time when that time is a censoring. So
/// `curve.last_time()` is always the largest observed time.
struct KaplanMeierFit {
  std::vector<KmRow> table;
  StepCurve curve;
  std::size_t n = 0;

  double operator()(double t) const { return curve(t); }
  double horizon() const noexcept { return curve.last_time(); }
};

/// Events are processed before censorings at tied times: a subject censored at t
/// is still at risk for events at t. Throws DomainError on empty or mismatched input.
KaplanMeierFit km_fit(std::span<const double> times, const std::vector<bool>& events);
KaplanMeierFit km_fit(const SurvivalDataset& ds);

/// KM of the censoring distribution G(t): the fit after flipping every event flag.
KaplanMeierFit censoring_km_fit(const SurvivalDataset& ds);

// ---------------------------------------------------------------------------
// Cox proportional hazards with a Breslow baseline
// ---------------------------------------------------------------------------

/// Non-decreasing cumulative hazard step function starting at 0.
struct CumulativeHazard {
  std::vector<double> knots;
  std::vector<double> values;

  double operator()(double t) const;
};

struct CoxModel {
  std::vector<double> beta;
  std::vector<double> feature_means;
  CumulativeHazard baseline_cumhaz;
  std::size_t iterations = 0;

  /// beta . (x - mean)
  double linear_predictor(std::span<const double> x) const;
};

struct FitOptions {
  std::size_t max_iter = 100;
  /// Convergence threshold on the max-norm of the per-subject mean score.
  double tol = 1e-8;
};

/// Maximizes the Breslow partial likelihood by step-halving Newton on mean-centered
/// features. Throws SeparationError when the likelihood is monotone (some |beta_j| > 50
/// or the optimum lies at infinity) and ConvergenceError after max_iter.
CoxModel coxph_fit(const SurvivalDataset& ds, const FitOptions& options = {});

/// H0(t) = sum over event times t_k <= t of d_k / sum_{j at risk} exp(beta . (x_j - mean)).
CumulativeHazard breslow_baseline(const CoxModel& model, const SurvivalDataset& ds);

/// Breslow log partial likelihood at the given coefficients (features centered on `means`).
double cox_partial_loglik(const SurvivalDataset& ds, std::span<const double> beta, std::span<const double> means);

/// S(t|x) = exp(-H0(t) exp(beta . (x - mean))) on the baseline knots.
StepCurve cox_survival_curve(const CoxModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------
// Weibull accelerated failure time (intercept only)
// ---------------------------------------------------------------------------

struct WeibullAFTModel {
  double shape = 1.0;
  double scale = 1.0;
  std::size_t iterations = 0;

  double survival(double t) const;
  /// Curve sampled on `grid` (prepended with 0 when absent).
  StepCurve curve(std::span<const double> grid) const;
};

/// Censored Weibull log-likelihood sum_i delta_i log f(t_i) + (1 - delta_i) log S(t_i).
double weibull_loglik(const SurvivalDataset& ds, double shape, double scale);

/// Newton in (log shape, log scale) with step halving. Throws ConvergenceError.
WeibullAFTModel weibull_aft_fit(const SurvivalDataset& ds, const FitOptions& options = {});

}  // namespace survmae
