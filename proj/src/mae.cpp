#include "survmae/mae.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "survmae/error.hpp"

namespace survmae {

namespace {

void require_same_size(const PredictedTimes& preds, std::size_t n, const char* what) {
  if (preds.size() != n) {
    throw DomainError(std::string(what) + ": " + std::to_string(preds.size()) + " predictions for " +
                      std::to_string(n) + " subjects");
  }
}

SurrogateSet observed_only(const SurvivalDataset& ds) {
  SurrogateSet s;
  s.surrogate.resize(ds.size());
  s.weight.assign(ds.size(), 1.0);
  s.included.assign(ds.size(), true);
  for (std::size_t i = 0; i < ds.size(); ++i) s.surrogate[i] = ds[i].time;
  return s;
}

// Restricted mean of the leave-one-out KM obtained by removing one subject censored at
// `censor_time`: every risk set with t_k <= censor_time loses one member.
double leave_one_out_mean(const KaplanMeierFit& km, double censor_time, double horizon) {
  double area = 0.0;
  double surv = 1.0;
  double prev = 0.0;
  for (const auto& row : km.table) {
    if (row.time > horizon) break;
    area += (row.time - prev) * surv;
    const bool shrunk = row.time <= censor_time;
    const double n = static_cast<double>(row.at_risk - (shrunk ? 1 : 0));
    surv *= (n - static_cast<double>(row.events)) / n;
    prev = row.time;
  }
  if (horizon > prev) area += (horizon - prev) * surv;
  return area;
}

}  // namespace

TimeMethod parse_time_method(std::string_view name) {
  if (name == "median") return TimeMethod::median;
  if (name == "mean") return TimeMethod::mean;
  throw ConfigError("unknown predicted-time method '" + std::string(name) + "' (expected median or mean)");
}

std::string_view to_string(TimeMethod method) { return method == TimeMethod::median ? "median" : "mean"; }

PredictedTimes::PredictedTimes(std::vector<double> v, TimeMethod m) : values(std::move(v)), method(m) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] <= 0.0) {
      throw DomainError("predicted time for subject " + std::to_string(i) + " must be finite and positive");
    }
  }
}

PredictedTimes extract_predicted_times(std::span<const StepCurve> curves, TimeMethod method) {
  if (curves.empty()) throw DomainError("no survival curves to extract predicted times from");
  std::vector<double> out;
  out.reserve(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    double t = 0.0;
    try {
      t = method == TimeMethod::median ? curve_median(curves[i]) : curve_mean(curves[i]);
    } catch (const DegenerateCurveError& e) {
      throw DegenerateCurveError("subject " + std::to_string(i) + ": " + e.what());
    }
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw DegenerateCurveError("subject " + std::to_string(i) + ": predicted time is not positive");
    }
    out.push_back(t);
  }
  return PredictedTimes(std::move(out), method);
}

double mae_uncensored(const PredictedTimes& preds, const SurvivalDataset& ds) {
  require_same_size(preds, ds.size(), "MAE-uncensored");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds[i].event) continue;
    total += std::abs(ds[i].time - preds[i]);
    ++count;
  }
  if (count == 0) throw UndefinedMetricError("MAE-uncensored needs at least one uncensored subject");
  return total / static_cast<double>(count);
}

double mae_hinge(const PredictedTimes& preds, const SurvivalDataset& ds) {
  require_same_size(preds, ds.size(), "MAE-hinge");
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double diff = ds[i].time - preds[i];
    total += ds[i].event ? std::abs(diff) : std::max(diff, 0.0);
  }
  return total / static_cast<double>(ds.size());
}

SurrogateSet margin_surrogates(const SurvivalDataset& ds_test, const KaplanMeierFit& km_train) {
  SurrogateSet s = observed_only(ds_test);
  const double horizon = km_train.horizon();
  for (std::size_t i = 0; i < ds_test.size(); ++i) {
    if (ds_test[i].event) continue;
    const double t = ds_test[i].time;
    const double surv = km_train.curve(t);
    if (surv <= 0.0) continue;  // surrogate t, weight 1
    const double tail = t < horizon ? km_train.curve.integrate(t, horizon) : 0.0;
    s.surrogate[i] = t + tail / surv;
    s.weight[i] = 1.0 - surv;
  }
  return s;
}

double weighted_mae(const SurrogateSet& surrogates, const PredictedTimes& preds) {
  require_same_size(preds, surrogates.size(), "weighted MAE");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < surrogates.size(); ++i) {
    if (!surrogates.included[i]) continue;
    num += surrogates.weight[i] * std::abs(surrogates.surrogate[i] - preds[i]);
    den += surrogates.weight[i];
  }
  if (!(den > 0.0)) throw UndefinedMetricError("weighted MAE: no included subject has positive weight");
  return num / den;
}

double mae_ipcw_d(const PredictedTimes& preds, const SurvivalDataset& ds_test, const KaplanMeierFit& g_train) {
  require_same_size(preds, ds_test.size(), "MAE-IPCW-D");
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < ds_test.size(); ++i) {
    if (!ds_test[i].event) continue;
    const double g = g_train.curve.left_limit(ds_test[i].time);
    if (!(g > 0.0)) continue;
    total += std::abs(ds_test[i].time - preds[i]) / g;
    ++used;
  }
  if (used == 0) throw UndefinedMetricError("MAE-IPCW-D: no uncensored subject with positive censoring survival");
  return total / static_cast<double>(ds_test.size());
}

SurrogateSet ipcw_t_surrogates(const SurvivalDataset& ds_test) {
  SurrogateSet s = observed_only(ds_test);
  std::vector<double> event_times;
  for (const auto& r : ds_test.records()) {
    if (r.event) event_times.push_back(r.time);
  }
  std::sort(event_times.begin(), event_times.end());
  // suffix[k] = sum of event_times[k..]
  std::vector<double> suffix(event_times.size() + 1, 0.0);
  for (std::size_t k = event_times.size(); k-- > 0;) suffix[k] = suffix[k + 1] + event_times[k];

  const auto km = km_fit(ds_test);
  for (std::size_t i = 0; i < ds_test.size(); ++i) {
    if (ds_test[i].event) continue;
    const double t = ds_test[i].time;
    const auto first_later =
        static_cast<std::size_t>(std::upper_bound(event_times.begin(), event_times.end(), t) - event_times.begin());
    const std::size_t later = event_times.size() - first_later;
    if (later == 0) {
      s.included[i] = false;
      s.weight[i] = 0.0;
      continue;
    }
    s.surrogate[i] = suffix[first_later] / static_cast<double>(later);
    s.weight[i] = 1.0 - km.curve(t);
  }
  return s;
}

double km_restricted_mean(const KaplanMeierFit& km) {
  if (km.table.empty()) throw UndefinedMetricError("Kaplan-Meier mean undefined: no events");
  return km.curve.integrate(0.0, km.horizon());
}

SurrogateSet pseudo_obs_surrogates(const SurvivalDataset& ds_test) {
  const auto km = km_fit(ds_test);
  const double theta = km_restricted_mean(km);
  const double horizon = km.horizon();
  const double n = static_cast<double>(ds_test.size());

  SurrogateSet s = observed_only(ds_test);
  for (std::size_t i = 0; i < ds_test.size(); ++i) {
    if (ds_test[i].event) continue;
    const double t = ds_test[i].time;
    const double theta_loo = leave_one_out_mean(km, t, horizon);
    s.surrogate[i] = n * theta - (n - 1.0) * theta_loo;
    s.weight[i] = 1.0 - km.curve(t);
  }
  return s;
}

SurrogateSet pseudo_obs_surrogates_refit(const SurvivalDataset& ds_test) {
  const auto km = km_fit(ds_test);
  const double theta = km_restricted_mean(km);
  const double horizon = km.horizon();
  const std::size_t n = ds_test.size();
  const auto times = ds_test.times();
  const auto events = ds_test.events();

  SurrogateSet s = observed_only(ds_test);
  std::vector<double> loo_times;
  std::vector<bool> loo_events;
  for (std::size_t i = 0; i < n; ++i) {
    if (events[i]) continue;
    loo_times.clear();
    loo_events.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      loo_times.push_back(times[j]);
      loo_events.push_back(events[j]);
    }
    const auto loo = km_fit(loo_times, loo_events);
    const double theta_loo = loo.curve.integrate(0.0, horizon);
    s.surrogate[i] = static_cast<double>(n) * theta - static_cast<double>(n - 1) * theta_loo;
    s.weight[i] = 1.0 - km.curve(times[i]);
  }
  return s;
}

SurrogateSet pop_po_surrogates(const SurvivalDataset& ds_test) {
  const auto km = km_fit(ds_test);
  const double theta = km_restricted_mean(km);
  SurrogateSet s = observed_only(ds_test);
  for (std::size_t i = 0; i < ds_test.size(); ++i) {
    if (ds_test[i].event) continue;
    s.surrogate[i] = theta;
    s.weight[i] = 1.0 - km.curve(ds_test[i].time);
  }
  return s;
}

double true_mae(const PredictedTimes& preds, const SurvivalDataset& ds_test) {
  require_same_size(preds, ds_test.size(), "true MAE");
  double total = 0.0;
  for (std::size_t i = 0; i < ds_test.size(); ++i) {
    const auto& truth = ds_test[i].true_event_time;
    if (!truth) throw MissingGroundTruthError("record " + std::to_string(i) + " has no hidden event time");
    total += std::abs(*truth - preds[i]);
  }
  return total / static_cast<double>(ds_test.size());
}

}  // namespace survmae
