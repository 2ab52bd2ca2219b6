#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "survmae/dataset.hpp"
#include "survmae/estimators.hpp"
#include "survmae/step_curve.hpp"

namespace survmae {

enum class TimeMethod { median, mean };

TimeMethod parse_time_method(std::string_view name);
std::string_view to_string(TimeMethod method);

/// One predicted event time per subject, all finite and positive.
struct PredictedTimes {
  std::vector<double> values;
  TimeMethod method = TimeMethod::median;

  PredictedTimes() = default;
  PredictedTimes(std::vector<double> v, TimeMethod m = TimeMethod::median);

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Per-subject proxy event time with a confidence weight. Excluded subjects carry
/// no information and are skipped by every score.
struct SurrogateSet {
  std::vector<double> surrogate;
  std::vector<double> weight;
  std::vector<bool> included;

  std::size_t size() const noexcept { return surrogate.size(); }
};

/// Reads a predicted time off each curve. DegenerateCurveError names the subject index.
PredictedTimes extract_predicted_times(std::span<const StepCurve> curves, TimeMethod method = TimeMethod::median);

double mae_uncensored(const PredictedTimes& preds, const SurvivalDataset& ds);
double mae_hinge(const PredictedTimes& preds, const SurvivalDataset& ds);

/// Censored i: t_i + (integral of S_KM from t_i to the curve's last knot) / S_KM(t_i),
/// weight 1 - S_KM(t_i). When S_KM(t_i) = 0 the surrogate is t_i with weight 1.
SurrogateSet margin_surrogates(const SurvivalDataset& ds_test, const KaplanMeierFit& km_train);

/// sum w_i |s_i - p_i| / sum w_i over included subjects.
double weighted_mae(const SurrogateSet& surrogates, const PredictedTimes& preds);

/// (1/N) sum over uncensored i of |t_i - p_i| / G(t_i-), G evaluated as a left limit.
/// Subjects with G(t_i-) = 0 drop out of the sum; N stays the full test size.
double mae_ipcw_d(const PredictedTimes& preds, const SurvivalDataset& ds_test, const KaplanMeierFit& g_train);

/// Censored i: mean of later uncensored times, margin-style weight from the same data;
/// censored subjects with no later event are excluded.
SurrogateSet ipcw_t_surrogates(const SurvivalDataset& ds_test);

/// Jackknife pseudo-observations N*theta - (N-1)*theta^{-i} of the restricted KM mean,
/// every integral taken over [0, largest observed time]. Leave-one-out curves come
/// from decrementing the shared count table.
SurrogateSet pseudo_obs_surrogates(const SurvivalDataset& ds_test);

/// Same values as pseudo_obs_surrogates by refitting KM N times.
SurrogateSet pseudo_obs_surrogates_refit(const SurvivalDataset& ds_test);

/// Every censored subject gets the group restricted KM mean.
SurrogateSet pop_po_surrogates(const SurvivalDataset& ds_test);

/// Restricted mean of a KM fit over [0, horizon]. Throws UndefinedMetricError without events.
double km_restricted_mean(const KaplanMeierFit& km);

/// MAE against hidden event times. Throws MissingGroundTruthError.
double true_mae(const PredictedTimes& preds, const SurvivalDataset& ds_test);

}  // namespace survmae
