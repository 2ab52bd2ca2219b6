#pragma once

// Generators and brute-force oracles shared by the unit, property and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "survmae/dataset.hpp"
#include "survmae/step_curve.hpp"
#include "survmae/synth.hpp"

namespace survmae::testing {

using Rng = std::mt19937_64;

inline std::vector<std::string> feature_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

inline SurvivalDataset make_dataset(const std::vector<double>& times, const std::vector<int>& events) {
  std::vector<SurvivalRecord> recs;
  for (std::size_t i = 0; i < times.size(); ++i) recs.push_back({{}, times[i], events[i] != 0, std::nullopt});
  return SurvivalDataset(std::move(recs), {});
}

struct RandomSpec {
  std::size_t n = 20;
  double censor_rate = 0.3;
  /// Integer times in [1, max_int_time] produce plenty of ties.
  bool integer_times = false;
  int max_int_time = 10;
  std::size_t dim = 0;
};

/// Independent exponential times with Bernoulli censoring flags.
inline SurvivalDataset random_dataset(Rng& rng, const RandomSpec& spec) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(0.2);
  std::uniform_int_distribution<int> itime(1, spec.max_int_time);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::vector<SurvivalRecord> recs;
  for (std::size_t i = 0; i < spec.n; ++i) {
    SurvivalRecord r;
    r.time = spec.integer_times ? itime(rng) : expo(rng) + 1e-3;
    r.event = unif(rng) >= spec.censor_rate;
    for (std::size_t j = 0; j < spec.dim; ++j) r.features.push_back(norm(rng));
    recs.push_back(std::move(r));
  }
  return SurvivalDataset(std::move(recs), feature_names(spec.dim));
}

/// Same as random_dataset with at least one event.
inline SurvivalDataset random_dataset_with_event(Rng& rng, const RandomSpec& spec) {
  while (true) {
    auto ds = random_dataset(rng, spec);
    if (ds.event_count() > 0) return ds;
  }
}

/// Product-limit survival at t by direct counting over raw arrays.
inline double brute_km(const std::vector<double>& times, const std::vector<bool>& events, double t) {
  std::vector<double> distinct;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (events[i] && times[i] <= t) distinct.push_back(times[i]);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  double s = 1.0;
  for (const double u : distinct) {
    int at_risk = 0;
    int died = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] >= u) ++at_risk;
      if (times[i] == u && events[i]) ++died;
    }
    s *= static_cast<double>(at_risk - died) / static_cast<double>(at_risk);
  }
  return s;
}

/// "Weibull world": d standard-normal features, Weibull event times whose scale depends on
/// the first feature, plus exponential censoring standing in for the real-world mechanism.
struct WorldSpec {
  std::size_t n = 2000;
  std::size_t dim = 3;
  double shape = 1.5;
  double scale = 10.0;
  double effect = 0.5;
  double raw_censor_mean = 30.0;
};

inline SurvivalDataset weibull_world(std::uint64_t seed, const WorldSpec& spec) {
  Rng rng(seed);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> cens(1.0 / spec.raw_censor_mean);
  std::vector<SurvivalRecord> recs;
  for (std::size_t i = 0; i < spec.n; ++i) {
    SurvivalRecord r;
    for (std::size_t j = 0; j < spec.dim; ++j) r.features.push_back(norm(rng));
    const double lambda = spec.scale * std::exp(-spec.effect * (spec.dim ? r.features[0] : 0.0));
    const double e = lambda * std::pow(-std::log(1.0 - unif(rng)), 1.0 / spec.shape);
    const double c = cens(rng);
    r.time = std::max(std::min(e, c), 1e-6);
    r.event = e <= c;
    recs.push_back(std::move(r));
  }
  return SurvivalDataset(std::move(recs), feature_names(spec.dim));
}

/// Exponential re-censoring with its mean tuned by bisection so the censor rate lands
/// within `tol` of `target`.
inline SurvivalDataset censor_to_rate(const SurvivalDataset& raw, double target, std::uint64_t seed,
                                      double tol = 0.01) {
  CensoringSpec spec;
  spec.kind = CensoringKind::exponential;
  double lo = 1e-4;
  double hi = 100.0;
  for (int it = 0; it < 60; ++it) {
    spec.exp_scale = std::sqrt(lo * hi);
    auto ds = make_semi_synthetic(raw, spec, seed);
    const double rate = ds.censor_rate();
    if (std::abs(rate - target) <= tol) return ds;
    (rate > target ? lo : hi) = spec.exp_scale;
  }
  return make_semi_synthetic(raw, spec, seed);
}

inline StepCurve constant_drop_curve(double at, double value) { return StepCurve({0.0, at}, {1.0, value}); }

}  // namespace survmae::testing
