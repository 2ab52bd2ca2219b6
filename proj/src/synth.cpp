#include "survmae/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "survmae/error.hpp"
#include "survmae/rng.hpp"

namespace survmae {

namespace {

constexpr std::uint64_t kCensorStream = 0;

double inverse_cumhaz(const CumulativeHazard& h, double target) {
  const auto it = std::lower_bound(h.values.begin(), h.values.end(), target);
  if (it == h.values.end()) return h.knots.back();
  return h.knots[static_cast<std::size_t>(it - h.values.begin())];
}

}  // namespace

CensoringKind parse_censoring_kind(std::string_view name) {
  if (name == "uniform") return CensoringKind::uniform;
  if (name == "uniform-admin" || name == "uniform_admin") return CensoringKind::uniform_admin;
  if (name == "exponential") return CensoringKind::exponential;
  if (name == "orig-indep" || name == "original_independent") return CensoringKind::original_independent;
  if (name == "orig-dep" || name == "original_dependent") return CensoringKind::original_dependent;
  if (name == "external") return CensoringKind::external;
  throw ConfigError("unknown censoring kind '" + std::string(name) + "'");
}

std::string_view to_string(CensoringKind kind) {
  switch (kind) {
    case CensoringKind::uniform: return "uniform";
    case CensoringKind::uniform_admin: return "uniform-admin";
    case CensoringKind::exponential: return "exponential";
    case CensoringKind::original_independent: return "orig-indep";
    case CensoringKind::original_dependent: return "orig-dep";
    case CensoringKind::external: return "external";
  }
  return "unknown";
}

void CensoringSpec::validate() const {
  if (kind == CensoringKind::external && !external_data && external_path.empty()) {
    throw ConfigError("external censoring needs a reference dataset");
  }
  if (kind == CensoringKind::exponential && !(exp_scale > 0.0 && std::isfinite(exp_scale))) {
    throw ConfigError("exponential censoring scale must be positive");
  }
}

SurvivalDataset flip_censor_bits(const SurvivalDataset& ds) {
  std::vector<SurvivalRecord> out(ds.records().begin(), ds.records().end());
  for (auto& r : out) {
    r.event = !r.event;
    r.true_event_time.reset();  // truth constraints tie to the event flag
  }
  return SurvivalDataset(std::move(out), ds.feature_names());
}

SurvivalDataset keep_uncensored(const SurvivalDataset& ds) {
  std::vector<SurvivalRecord> out;
  for (const auto& r : ds.records()) {
    if (!r.event) continue;
    auto copy = r;
    copy.true_event_time = r.time;
    out.push_back(std::move(copy));
  }
  if (out.empty()) throw DomainError("dataset has no uncensored records");
  return SurvivalDataset(std::move(out), ds.feature_names());
}

CensoringModels fit_censoring_models(const SurvivalDataset& ds_raw, const CensoringSpec& spec) {
  spec.validate();
  CensoringModels m;
  switch (spec.kind) {
    case CensoringKind::original_independent:
      m.km = censoring_km_fit(ds_raw);
      break;
    case CensoringKind::original_dependent: {
      if (ds_raw.dimension() == 0) throw ConfigError("feature-dependent censoring needs at least one feature");
      const auto flipped = flip_censor_bits(ds_raw);
      auto model = coxph_fit(flipped);
      m.cox = std::move(model);
      break;
    }
    case CensoringKind::external: {
      const SurvivalDataset ref = spec.external_data ? *spec.external_data : load_dataset(spec.external_path);
      m.external_km = censoring_km_fit(ref);
      m.external_t_max = dataset_stats(ref).t_max_event;
      break;
    }
    default:
      break;
  }
  return m;
}

double inverse_transform(const StepCurve& curve, double u) {
  const auto values = curve.values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] <= u) return curve.knots()[k];
  }
  return curve.last_time();
}

std::vector<double> sample_censor_times(const CensoringSpec& spec, const SurvivalDataset& d_prime,
                                        const DatasetStats& stats, const CensoringModels& aux, std::uint64_t seed) {
  spec.validate();
  const KeyedRng rng(seed);
  const std::size_t n = d_prime.size();
  std::vector<double> out(n);

  switch (spec.kind) {
    case CensoringKind::uniform:
      for (std::size_t i = 0; i < n; ++i) out[i] = rng.uniform(i, kCensorStream) * stats.t_max_event;
      break;
    case CensoringKind::uniform_admin:
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::min(rng.uniform(i, kCensorStream) * stats.t_max_event, stats.t_median_event);
      }
      break;
    case CensoringKind::exponential: {
      const double mean = stats.sigma_event * spec.exp_scale;
      if (!(mean > 0.0)) throw ConfigError("exponential censoring needs a positive event-time spread");
      for (std::size_t i = 0; i < n; ++i) out[i] = rng.exponential(mean, i, kCensorStream);
      break;
    }
    case CensoringKind::original_independent:
      if (!aux.km) throw ConfigError("orig-indep censoring needs a fitted censoring KM");
      for (std::size_t i = 0; i < n; ++i) out[i] = inverse_transform(aux.km->curve, rng.uniform(i, kCensorStream));
      break;
    case CensoringKind::original_dependent: {
      if (!aux.cox) throw ConfigError("orig-dep censoring needs a fitted censoring Cox model");
      const auto& h = aux.cox->baseline_cumhaz;
      for (std::size_t i = 0; i < n; ++i) {
        // G(t|x) = exp(-H0(t) r) <= u  <=>  H0(t) >= -log(u) / r
        const double risk = std::exp(aux.cox->linear_predictor(d_prime[i].features));
        out[i] = inverse_cumhaz(h, -std::log(rng.uniform(i, kCensorStream)) / risk);
      }
      break;
    }
    case CensoringKind::external: {
      if (!aux.external_km || !(aux.external_t_max > 0.0)) {
        throw ConfigError("external censoring needs a fitted reference censoring KM");
      }
      const double ratio = stats.t_max_event / aux.external_t_max;
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = inverse_transform(aux.external_km->curve, rng.uniform(i, kCensorStream)) * ratio;
      }
      break;
    }
  }
  return out;
}

SurvivalDataset apply_censoring(const SurvivalDataset& d_prime, const std::vector<double>& censor_times) {
  if (censor_times.size() != d_prime.size()) {
    throw DomainError("apply_censoring: " + std::to_string(censor_times.size()) + " censor times for " +
                      std::to_string(d_prime.size()) + " records");
  }
  std::vector<SurvivalRecord> out;
  out.reserve(d_prime.size());
  for (std::size_t i = 0; i < d_prime.size(); ++i) {
    auto r = d_prime[i];
    const double truth = r.true_event_time.value_or(r.time);
    const double c = censor_times[i];
    if (std::isnan(c)) throw DomainError("censor time for record " + std::to_string(i) + " is NaN");
    r.true_event_time = truth;
    if (c < truth && c > 0.0) {
      r.time = c;
      r.event = false;
    } else if (c < truth) {
      throw DomainError("censor time for record " + std::to_string(i) + " is not positive");
    } else {
      r.time = truth;
      r.event = true;
    }
    out.push_back(std::move(r));
  }
  return SurvivalDataset(std::move(out), d_prime.feature_names());
}

SemiSyntheticResult make_semi_synthetic_detailed(const SurvivalDataset& ds_raw, const CensoringSpec& spec,
                                                 std::uint64_t seed) {
  auto d_prime = keep_uncensored(ds_raw);
  const auto stats = dataset_stats(d_prime);
  const auto models = fit_censoring_models(ds_raw, spec);
  const auto censor = sample_censor_times(spec, d_prime, stats, models, seed);
  auto data = apply_censoring(d_prime, censor);
  const double rate = data.censor_rate();
  return SemiSyntheticResult{std::move(data), stats, rate};
}

SurvivalDataset make_semi_synthetic(const SurvivalDataset& ds_raw, const CensoringSpec& spec, std::uint64_t seed) {
  return make_semi_synthetic_detailed(ds_raw, spec, seed).data;
}

}  // namespace survmae
