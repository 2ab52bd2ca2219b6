#include "survmae/harness.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <ostream>
#include <set>
#include <string>

#include "csv.hpp"
#include "survmae/aux_metrics.hpp"
#include "survmae/error.hpp"
#include "survmae/estimators.hpp"
#include "survmae/folds.hpp"
#include "survmae/rng.hpp"

namespace survmae {

namespace {

constexpr double kOracleShape = 2.0;

// Ratios t / median at which oracle curves are sampled; 1 is included exactly.
const std::vector<double>& oracle_ratios() {
  static const std::vector<double> ratios = [] {
    std::vector<double> r;
    constexpr int kPoints = 64;
    const double lo = std::log(0.02);
    const double hi = std::log(8.0);
    for (int j = 0; j < kPoints; ++j) r.push_back(std::exp(lo + (hi - lo) * j / (kPoints - 1)));
    r.push_back(1.0);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
  }();
  return ratios;
}

StepCurve weibull_curve_with_median(double median, double shape) {
  const auto& ratios = oracle_ratios();
  std::vector<double> knots{0.0};
  std::vector<double> values{1.0};
  for (const double r : ratios) {
    knots.push_back(median * r);
    values.push_back(r == 1.0 ? 0.5 : std::exp(-std::numbers::ln2 * std::pow(r, shape)));
  }
  return StepCurve(std::move(knots), std::move(values));
}

std::string format_number(double v) { return detail::format_double(v); }

template <typename F>
std::optional<double> guarded(F&& f) {
  try {
    const double v = f();
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<StepCurve> repeat(const StepCurve& c, std::size_t n) { return std::vector<StepCurve>(n, c); }

}  // namespace

ModelSpec ModelSpec::noisy_oracle(double noise, double scale) {
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("oracle noise must be nonnegative");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("oracle scale must be positive");
  auto s = ModelSpec::of(ModelKind::noisy_oracle);
  s.noise = noise;
  s.scale = scale;
  return s;
}

ModelSpec ModelSpec::external(std::shared_ptr<const CurveTable> table, std::filesystem::path path) {
  if (!table) throw ConfigError("external curve model needs a curve table");
  auto s = ModelSpec::of(ModelKind::external_curves);
  s.curves = std::move(table);
  s.curves_path = std::move(path);
  return s;
}

std::string ModelSpec::name() const {
  switch (kind) {
    case ModelKind::km: return "km";
    case ModelKind::coxph: return "coxph";
    case ModelKind::weibull_aft: return "weibull_aft";
    case ModelKind::noisy_oracle: {
      std::string s = "noisy:" + format_number(noise);
      if (scale != 1.0) s += ":" + format_number(scale);
      return s;
    }
    case ModelKind::external_curves:
      return "curves:" + (curves_path.empty() ? std::string("memory") : curves_path.filename().string());
  }
  return "unknown";
}

ModelSpec parse_model_spec(std::string_view text) {
  const auto trimmed = detail::trim(text);
  if (trimmed == "km") return ModelSpec::km();
  if (trimmed == "coxph" || trimmed == "cox") return ModelSpec::coxph();
  if (trimmed == "weibull_aft" || trimmed == "weibull") return ModelSpec::weibull_aft();
  if (trimmed.starts_with("noisy:")) {
    auto rest = trimmed.substr(6);
    const auto colon = rest.find(':');
    const auto noise = detail::parse_double(rest.substr(0, colon));
    std::optional<double> scale = 1.0;
    if (colon != std::string_view::npos) scale = detail::parse_double(rest.substr(colon + 1));
    if (!noise || !scale) throw ConfigError("bad oracle model '" + std::string(trimmed) + "'");
    return ModelSpec::noisy_oracle(*noise, *scale);
  }
  if (trimmed.starts_with("curves:")) {
    std::filesystem::path path(std::string(trimmed.substr(7)));
    return ModelSpec::external(std::make_shared<const CurveTable>(load_curves(path)), path);
  }
  throw ConfigError("unknown model '" + std::string(trimmed) + "'");
}

std::vector<ModelSpec> parse_model_list(std::string_view comma_separated) {
  std::vector<ModelSpec> out;
  for (const auto cell : detail::split_row(comma_separated)) {
    if (!cell.empty()) out.push_back(parse_model_spec(cell));
  }
  if (out.empty()) throw ConfigError("model list is empty");
  return out;
}

std::vector<StepCurve> noisy_oracle_predictions(const SurvivalDataset& ds_test, double noise, std::uint64_t seed,
                                                double scale) {
  const KeyedRng rng(seed);
  std::vector<StepCurve> out;
  out.reserve(ds_test.size());
  for (std::size_t i = 0; i < ds_test.size(); ++i) {
    const auto& truth = ds_test[i].true_event_time;
    if (!truth) throw MissingGroundTruthError("noisy oracle: record " + std::to_string(i) + " has no hidden time");
    const double eps = noise > 0.0 ? noise * rng.normal(i) : 0.0;
    out.push_back(weibull_curve_with_median(*truth * scale * std::exp(eps), kOracleShape));
  }
  return out;
}

std::vector<StepCurve> predict_curves(const ModelSpec& spec, const SurvivalDataset& train,
                                      const SurvivalDataset& test, std::span<const std::size_t> test_rows,
                                      std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::km:
      return repeat(km_fit(train).curve, test.size());
    case ModelKind::coxph: {
      const auto model = coxph_fit(train);
      std::vector<StepCurve> out;
      out.reserve(test.size());
      for (const auto& r : test.records()) out.push_back(cox_survival_curve(model, r.features));
      return out;
    }
    case ModelKind::weibull_aft: {
      const auto model = weibull_aft_fit(train);
      auto grid = train.times();
      grid.push_back(model.scale * std::pow(std::numbers::ln2, 1.0 / model.shape));
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      return repeat(model.curve(grid), test.size());
    }
    case ModelKind::noisy_oracle:
      return noisy_oracle_predictions(test, spec.noise, seed, spec.scale);
    case ModelKind::external_curves:
      if (!spec.curves) throw ConfigError("external curve model has no curve table");
      if (test_rows.size() != test.size()) throw DomainError("external curves: row indices do not match test set");
      return spec.curves->select(test_rows);
  }
  throw ConfigError("unknown model kind");
}

const std::vector<std::string>& mae_metric_names() {
  static const std::vector<std::string> names{metric::uncensored, metric::hinge,  metric::margin, metric::ipcw_d,
                                              metric::ipcw_t,     metric::po,     metric::pop_po, metric::truth};
  return names;
}

const std::vector<std::string>& aux_metric_names() {
  static const std::vector<std::string> names{metric::c_index, metric::ibs, metric::log_lik, metric::one_cal_p,
                                              metric::d_cal_p};
  return names;
}

MetricScores evaluate_metrics(std::span<const StepCurve> curves, const SurvivalDataset& train,
                              const SurvivalDataset& test, const EvalOptions& options) {
  if (curves.size() != test.size()) throw DomainError("evaluate_metrics: one curve per test subject required");
  MetricScores out;
  for (const auto& m : mae_metric_names()) out[m] = std::nullopt;

  std::optional<PredictedTimes> preds;
  try {
    preds = extract_predicted_times(curves, options.method);
  } catch (const Error&) {
  }

  if (preds) {
    const auto& p = *preds;
    out[metric::uncensored] = guarded([&] { return mae_uncensored(p, test); });
    out[metric::hinge] = guarded([&] { return mae_hinge(p, test); });
    out[metric::margin] = guarded([&] { return weighted_mae(margin_surrogates(test, km_fit(train)), p); });
    out[metric::ipcw_d] = guarded([&] { return mae_ipcw_d(p, test, censoring_km_fit(train)); });
    out[metric::ipcw_t] = guarded([&] { return weighted_mae(ipcw_t_surrogates(test), p); });
    out[metric::po] = guarded([&] { return weighted_mae(pseudo_obs_surrogates(test), p); });
    out[metric::pop_po] = guarded([&] { return weighted_mae(pop_po_surrogates(test), p); });
    if (test.has_ground_truth()) out[metric::truth] = guarded([&] { return true_mae(p, test); });
  }

  if (!options.aux_metrics) return out;
  if (preds) {
    out[metric::c_index] = guarded([&] { return concordance_index(*preds, test); });
  } else {
    out[metric::c_index] = std::nullopt;
  }
  const auto g = censoring_km_fit(train);
  out[metric::ibs] = guarded([&] {
    return integrated_brier_score(curves, test, g, options.ibs_grid, dataset_stats(train).t_max_event);
  });
  out[metric::log_lik] = guarded([&] {
    const auto ll = log_likelihood(curves, test);
    return ll.degenerate ? std::nan("") : ll.value;
  });
  out[metric::one_cal_p] = guarded([&] {
    return one_calibration(curves, test, dataset_stats(train).t_median_event, options.calibration_bins).p_value;
  });
  out[metric::d_cal_p] = guarded([&] { return d_calibration(curves, test, options.calibration_bins).p_value; });
  return out;
}

double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("Kendall tau: score vectors differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  double concordant_minus_discordant = 0.0;
  double pairs = 0.0;
  double ties_a = 0.0;
  double ties_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      pairs += 1.0;
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0) ties_a += 1.0;
      if (db == 0.0) ties_b += 1.0;
      if (da != 0.0 && db != 0.0) concordant_minus_discordant += (da > 0.0) == (db > 0.0) ? 1.0 : -1.0;
    }
  }
  const double denom = std::sqrt((pairs - ties_a) * (pairs - ties_b));
  if (denom == 0.0) return ties_a == pairs && ties_b == pairs ? 1.0 : 0.0;
  return concordant_minus_discordant / denom;
}

std::vector<std::string> rank_models(const std::map<std::string, double>& scores) {
  std::vector<std::pair<double, std::string>> v;
  for (const auto& [name, s] : scores) v.emplace_back(s, name);
  std::sort(v.begin(), v.end());
  std::vector<std::string> out;
  for (auto& [s, name] : v) out.push_back(std::move(name));
  return out;
}

RankAgreement rank_agreement(const std::map<std::string, double>& true_scores,
                             const std::map<std::string, double>& metric_scores) {
  if (true_scores.size() != metric_scores.size()) throw DomainError("rank agreement: model sets differ");
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [name, s] : true_scores) {
    const auto it = metric_scores.find(name);
    if (it == metric_scores.end()) throw DomainError("rank agreement: model '" + name + "' missing from metric");
    a.push_back(s);
    b.push_back(it->second);
  }
  RankAgreement out;
  out.kendall_tau = kendall_tau_b(a, b);
  const auto rt = rank_models(true_scores);
  const auto rm = rank_models(metric_scores);
  const std::size_t top = std::min<std::size_t>(3, rt.size());
  const std::set<std::string> top_true(rt.begin(), rt.begin() + static_cast<std::ptrdiff_t>(top));
  for (std::size_t i = 0; i < top; ++i) out.top3_overlap += top_true.count(rm[i]);
  return out;
}

std::optional<double> ExperimentReport::mean(const std::string& model, const std::string& metric) const {
  const auto m = mean_scores.find(model);
  if (m == mean_scores.end()) return std::nullopt;
  const auto s = m->second.find(metric);
  return s == m->second.end() ? std::nullopt : s->second;
}

ExperimentReport run_experiment(const SurvivalDataset& ds, const std::vector<ModelSpec>& models,
                                const ExperimentOptions& options) {
  if (models.empty()) throw ConfigError("experiment needs at least one model");
  ExperimentReport report;
  report.folds = options.k;
  for (const auto& m : models) {
    const auto name = m.name();
    if (std::find(report.models.begin(), report.models.end(), name) != report.models.end()) {
      throw ConfigError("duplicate model '" + name + "'");
    }
    report.models.push_back(name);
  }
  report.metrics = mae_metric_names();
  if (options.eval.aux_metrics) {
    report.metrics.insert(report.metrics.end(), aux_metric_names().begin(), aux_metric_names().end());
  }
  for (const auto& model : report.models) {
    for (const auto& metric : report.metrics) report.per_fold_scores[model][metric].assign(options.k, std::nullopt);
  }

  const auto split = stratified_kfold(ds, options.k, options.seed);
  const KeyedRng root(options.seed);
  for (std::size_t f = 0; f < options.k; ++f) {
    const auto& test_rows = split.folds[f];
    const auto train_rows = split.complement(f);
    const auto train = ds.subset(train_rows);
    const auto test = ds.subset(test_rows);
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      const auto& name = report.models[mi];
      const std::uint64_t model_seed = root.derive(f).derive(mi).seed();
      MetricScores scores;
      try {
        const auto curves = predict_curves(models[mi], train, test, test_rows, model_seed);
        scores = evaluate_metrics(curves, train, test, options.eval);
      } catch (const Error& e) {
        report.notes.push_back("fold " + std::to_string(f) + ", " + name + ": " + e.what());
        continue;
      }
      for (const auto& [metric, value] : scores) {
        auto it = report.per_fold_scores[name].find(metric);
        if (it != report.per_fold_scores[name].end()) it->second[f] = value;
      }
    }
  }

  for (const auto& model : report.models) {
    for (const auto& metric : report.metrics) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& v : report.per_fold_scores[model][metric]) {
        if (v) {
          sum += *v;
          ++count;
        }
      }
      report.mean_scores[model][metric] = count ? std::optional<double>(sum / static_cast<double>(count)) : std::nullopt;
    }
  }

  std::map<std::string, double> truth;
  for (const auto& model : report.models) {
    if (const auto v = report.mean(model, metric::truth)) truth[model] = *v;
  }
  report.true_mae_rank = rank_models(truth);

  for (const auto& metric : report.metrics) {
    std::map<std::string, double> scores;
    for (const auto& model : report.models) {
      if (const auto v = report.mean(model, metric)) scores[model] = *v;
    }
    // Higher is better for concordance, likelihood and calibration p-values.
    const bool higher_better = metric == metric::c_index || metric == metric::log_lik ||
                               metric == metric::one_cal_p || metric == metric::d_cal_p;
    if (higher_better) {
      std::map<std::string, double> negated;
      for (const auto& [k, v] : scores) negated[k] = -v;
      report.per_metric_rank[metric] = rank_models(negated);
    } else {
      report.per_metric_rank[metric] = rank_models(scores);
    }
  }

  if (!truth.empty()) {
    for (const auto& metric : mae_metric_names()) {
      std::map<std::string, double> t;
      std::map<std::string, double> m;
      for (const auto& [model, tv] : truth) {
        if (const auto v = report.mean(model, metric)) {
          t[model] = tv;
          m[model] = *v;
        }
      }
      if (m.empty()) continue;
      const auto ra = rank_agreement(t, m);
      MetricAgreement a;
      a.kendall_tau = ra.kendall_tau;
      a.top3_overlap = ra.top3_overlap;
      a.models_compared = m.size();
      for (const auto& [model, v] : m) a.abs_gap_to_true += std::abs(v - t[model]);
      a.abs_gap_to_true /= static_cast<double>(m.size());
      report.agreement[metric] = a;
    }
  }
  return report;
}

ExperimentReport run_experiment(const SurvivalDataset& ds, const std::vector<ModelSpec>& models, std::size_t k,
                                std::uint64_t seed) {
  ExperimentOptions options;
  options.k = k;
  options.seed = seed;
  return run_experiment(ds, models, options);
}

std::string report_to_json(const ExperimentReport& report, int indent) {
  using nlohmann::json;
  const auto cell = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["models"] = report.models;
  j["metrics"] = report.metrics;
  j["folds"] = report.folds;
  json per_fold = json::object();
  for (const auto& [model, metrics] : report.per_fold_scores) {
    for (const auto& [metric, values] : metrics) {
      json arr = json::array();
      for (const auto& v : values) arr.push_back(cell(v));
      per_fold[model][metric] = std::move(arr);
    }
  }
  j["per_fold_scores"] = std::move(per_fold);
  json means = json::object();
  for (const auto& [model, metrics] : report.mean_scores) {
    for (const auto& [metric, v] : metrics) means[model][metric] = cell(v);
  }
  j["mean_scores"] = std::move(means);
  j["true_mae_rank"] = report.true_mae_rank;
  j["per_metric_rank"] = report.per_metric_rank;
  json agreement = json::object();
  for (const auto& [metric, a] : report.agreement) {
    agreement[metric] = {{"kendall_tau", a.kendall_tau},
                         {"top3_overlap", a.top3_overlap},
                         {"abs_gap_to_true", a.abs_gap_to_true},
                         {"models_compared", a.models_compared}};
  }
  j["agreement"] = std::move(agreement);
  j["notes"] = report.notes;
  return j.dump(indent);
}

void write_fold_csv(std::ostream& out, const ExperimentReport& report) {
  out << "model,metric,fold,value\n";
  for (const auto& model : report.models) {
    const auto& metrics = report.per_fold_scores.at(model);
    for (const auto& metric : report.metrics) {
      const auto& values = metrics.at(metric);
      for (std::size_t f = 0; f < values.size(); ++f) {
        out << model << ',' << metric << ',' << f << ',';
        if (values[f]) out << detail::format_double(*values[f]);
        out << '\n';
      }
    }
  }
}

}  // namespace survmae
