#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "support.hpp"
#include "survmae/curve_io.hpp"
#include "survmae/error.hpp"
#include "survmae/harness.hpp"
#include "survmae/mae.hpp"
#include "survmae/synth.hpp"

using namespace survmae;
using namespace survmae::testing;

namespace {

SurvivalDataset semi_synthetic(std::uint64_t seed, std::size_t n, CensoringKind kind = CensoringKind::uniform_admin) {
  CensoringSpec spec;
  spec.kind = kind;
  return make_semi_synthetic(weibull_world(seed, {.n = n}), spec, seed);
}

ExperimentOptions fast(std::uint64_t seed, std::size_t k = 5) {
  ExperimentOptions o;
  o.k = k;
  o.seed = seed;
  o.eval.aux_metrics = false;
  return o;
}

}  // namespace

TEST_CASE("noisy oracle: exact at zero noise, deterministic, needs truth") {
  const auto ds = semi_synthetic(1, 300);
  const auto curves = noisy_oracle_predictions(ds, 0.0, 5);
  CHECK(true_mae(extract_predicted_times(curves), ds) == 0.0);
  const auto a = noisy_oracle_predictions(ds, 0.5, 9);
  const auto b = noisy_oracle_predictions(ds, 0.5, 9);
  CHECK(a == b);
  CHECK_FALSE(a == noisy_oracle_predictions(ds, 0.5, 10));
  const auto scaled = extract_predicted_times(noisy_oracle_predictions(ds, 0.0, 5, 5.0));
  CHECK(scaled[0] == doctest::Approx(5.0 * *ds[0].true_event_time));
  CHECK_THROWS_AS(noisy_oracle_predictions(make_dataset({1, 2}, {1, 0}), 0.1, 1), MissingGroundTruthError);
}

TEST_CASE("noisy oracle: true MAE grows with noise") {
  const auto ds = semi_synthetic(2, 400);
  double low = 0.0;
  double high = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    low += true_mae(extract_predicted_times(noisy_oracle_predictions(ds, 0.2, seed)), ds);
    high += true_mae(extract_predicted_times(noisy_oracle_predictions(ds, 0.8, seed)), ds);
  }
  CHECK(low < high);
}

TEST_CASE("rank agreement") {
  const std::map<std::string, double> five{{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}, {"e", 5}};
  const auto same = rank_agreement(five, five);
  CHECK(same.kendall_tau == 1.0);
  CHECK(same.top3_overlap == 3);
  const std::map<std::string, double> reversed{{"a", 5}, {"b", 4}, {"c", 3}, {"d", 2}, {"e", 1}};
  CHECK(rank_agreement(five, reversed).kendall_tau == -1.0);
  const std::map<std::string, double> t4{{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}};
  const std::map<std::string, double> m4{{"a", 1}, {"b", 2}, {"c", 4}, {"d", 3}};
  const auto r = rank_agreement(t4, m4);
  CHECK(r.kendall_tau == doctest::Approx(2.0 / 3.0));
  // Lowest three are {a, b, c} against {a, b, d}.
  CHECK(r.top3_overlap == 2);
  CHECK_THROWS_AS(rank_agreement(t4, five), DomainError);
  CHECK_THROWS_AS(rank_agreement({{"a", 1}}, {{"b", 1}}), DomainError);
  CHECK(rank_models({{"z", 1}, {"a", 1}, {"m", 0}}) == std::vector<std::string>{"m", "a", "z"});
}

TEST_CASE("model specs") {
  CHECK(parse_model_spec("noisy:0.2").name() == "noisy:0.2");
  CHECK(parse_model_spec("noisy:0.1:5").scale == 5.0);
  CHECK(parse_model_list("km, coxph,weibull_aft").size() == 3);
  CHECK_THROWS_AS(parse_model_spec("rsf"), ConfigError);
  CHECK_THROWS_AS(parse_model_spec("noisy:-1"), ConfigError);
  CHECK_THROWS_AS(parse_model_list(""), ConfigError);
}

TEST_CASE("experiment: oracles rank by noise") {
  int correct = 0;
  const std::vector<ModelSpec> models{ModelSpec::noisy_oracle(0.1), ModelSpec::noisy_oracle(0.4),
                                      ModelSpec::noisy_oracle(1.0)};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto ds = semi_synthetic(seed + 100, 500);
    const auto report = run_experiment(ds, models, fast(seed));
    if (report.true_mae_rank == std::vector<std::string>{"noisy:0.1", "noisy:0.4", "noisy:1"}) ++correct;
  }
  CHECK(correct >= 48);
}

TEST_CASE("experiment: self-agreement, single model and determinism") {
  const auto ds = semi_synthetic(3, 600);
  const std::vector<ModelSpec> models{ModelSpec::km(), ModelSpec::coxph(), ModelSpec::weibull_aft(),
                                      ModelSpec::noisy_oracle(0.3)};
  ExperimentOptions opts;
  opts.seed = 4;
  const auto report = run_experiment(ds, models, opts);
  const auto& self = report.agreement.at(metric::truth);
  CHECK(self.kendall_tau == 1.0);
  CHECK(self.top3_overlap == 3);
  CHECK(self.abs_gap_to_true == 0.0);
  CHECK(report.true_mae_rank.size() == 4);
  for (const auto& [metric, rank] : report.per_metric_rank) {
    CHECK(rank.size() <= 4);
  }
  for (const auto& [metric, a] : report.agreement) CHECK(a.top3_overlap <= 3);
  CHECK(report.mean("coxph", metric::c_index).value() > 0.5);
  CHECK(report.notes.empty());

  const auto again = run_experiment(ds, models, opts);
  CHECK(report_to_json(report) == report_to_json(again));

  const auto single = run_experiment(ds, {ModelSpec::coxph()}, fast(1));
  const auto& po = single.agreement.at(metric::po);
  CHECK(po.kendall_tau == 1.0);
  CHECK(po.top3_overlap == 1);
  CHECK(po.abs_gap_to_true > 0.0);
}

TEST_CASE("experiment: no censoring collapses the MAE columns") {
  auto raw = weibull_world(5, {.n = 300});
  const auto ds = keep_uncensored(raw);
  const auto report = run_experiment(ds, {ModelSpec::coxph(), ModelSpec::noisy_oracle(0.5)}, fast(2));
  for (const auto& model : report.models) {
    for (std::size_t f = 0; f < report.folds; ++f) {
      const double base = *report.per_fold_scores.at(model).at(metric::uncensored)[f];
      for (const char* m : {metric::hinge, metric::margin, metric::ipcw_d, metric::ipcw_t, metric::po,
                            metric::pop_po, metric::truth}) {
        CHECK(std::abs(*report.per_fold_scores.at(model).at(m)[f] - base) <= 1e-12);
      }
    }
  }
}

TEST_CASE("experiment: undefined metrics become missing cells") {
  // Real-world data without hidden truth: no true MAE and no agreement table.
  Rng rng(9);
  const auto ds = random_dataset(rng, {.n = 80, .censor_rate = 0.3, .dim = 2});
  const auto report = run_experiment(ds, {ModelSpec::km(), ModelSpec::weibull_aft()}, 4, 3);
  CHECK_FALSE(report.mean("km", metric::truth).has_value());
  CHECK(report.agreement.empty());
  CHECK(report.true_mae_rank.empty());
  CHECK(report.mean("km", metric::po).has_value());
  // Oracles need hidden truth: the failure is recorded, not thrown.
  const auto oracle = run_experiment(ds, {ModelSpec::noisy_oracle(0.1)}, fast(1, 2));
  CHECK(oracle.notes.size() == 2);
}

TEST_CASE("experiment: hinge is optimistic for an overestimating oracle") {
  int optimistic = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = censor_to_rate(weibull_world(seed + 300, {.n = 500}), 0.8, seed);
    const auto curves = noisy_oracle_predictions(ds, 0.1, seed, 5.0);
    const auto p = extract_predicted_times(curves);
    if (mae_hinge(p, ds) < true_mae(p, ds)) ++optimistic;
  }
  CHECK(optimistic >= 19);
}

TEST_CASE("curve files round-trip and feed the harness") {
  const auto ds = semi_synthetic(6, 200);
  const auto curves = noisy_oracle_predictions(ds, 0.2, 3);
  std::vector<double> grid;
  for (int j = 0; j <= 400; ++j) grid.push_back(0.25 * j);
  std::stringstream buf;
  write_curves(buf, grid, curves);
  const auto table = parse_curves(buf);
  REQUIRE(table.curves.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (const double t : grid) CHECK(table.curves.at(i)(t) == curves[i](t));
  }
  const auto model = ModelSpec::external(std::make_shared<const CurveTable>(table));
  const auto report = run_experiment(ds, {model, ModelSpec::km()}, fast(1));
  CHECK(report.mean(model.name(), metric::truth).has_value());

  std::stringstream missing;
  missing << "t,0,1\n0,1,0.5\n";
  const auto partial = parse_curves(missing);
  CHECK_THROWS_AS(partial.first(2), DomainError);

  std::stringstream rising;
  rising << "t,0,1\n0,0.5,0.6\n";
  CHECK_THROWS_AS(parse_curves(rising), ParseError);
  std::stringstream bad_header;
  bad_header << "time,0,1\n";
  CHECK_THROWS_AS(parse_curves(bad_header), ParseError);
}

TEST_CASE("report serialization") {
  const auto ds = semi_synthetic(7, 300);
  const auto report = run_experiment(ds, {ModelSpec::km(), ModelSpec::noisy_oracle(0.2)}, 3, 1);
  const auto j = nlohmann::json::parse(report_to_json(report));
  CHECK(j["models"].size() == 2);
  CHECK(j["mean_scores"]["km"].contains(metric::po));
  CHECK(j["agreement"][metric::po]["top3_overlap"].get<int>() <= 3);
  std::ostringstream csv;
  write_fold_csv(csv, report);
  const auto text = csv.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == 1 + 2 * static_cast<long>(report.metrics.size()) * 3);
}

TEST_CASE("evaluate_metrics on a fitted model") {
  const auto ds = semi_synthetic(8, 400, CensoringKind::uniform);
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto curves = predict_curves(ModelSpec::coxph(), ds, ds, all, 0);
  const auto scores = evaluate_metrics(curves, ds, ds);
  for (const auto& name : mae_metric_names()) CHECK(scores.at(name).has_value());
  CHECK(scores.at(metric::ibs).value() < 0.25);
  CHECK(scores.at(metric::c_index).value() > 0.5);
  CHECK(scores.at(metric::d_cal_p).has_value());
  CHECK(scores.at(metric::one_cal_p).has_value());
}
