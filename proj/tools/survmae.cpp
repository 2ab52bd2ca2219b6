// Command-line front end: dataset stats, semi-synthetic generation, metric evaluation,
// cross-validated experiments and baseline model fitting.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <string>

#include "survmae/curve_io.hpp"
#include "survmae/dataset.hpp"
#include "survmae/error.hpp"
#include "survmae/harness.hpp"
#include "survmae/synth.hpp"

namespace {

using nlohmann::json;
using namespace survmae;

json stats_json(const DatasetStats& s) {
  return {{"n", s.n},
          {"censor_rate", s.censor_rate},
          {"t_max_event", s.t_max_event},
          {"t_median_event", s.t_median_event},
          {"sigma_event", s.sigma_event}};
}

json scores_json(const MetricScores& scores) {
  json j = json::object();
  for (const auto& [k, v] : scores) j[k] = v ? json(*v) : json(nullptr);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text << '\n';
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  p.replace_extension(suffix);
  return p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survival-model evaluation with censoring-aware MAE metrics"};
  app.require_subcommand(1);

  std::string data;
  std::string time_col = "time";
  std::string event_col = "event";
  const auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("data", data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--time-col", time_col, "Time column name");
    cmd->add_option("--event-col", event_col, "Event column name (1 = event, 0 = censored)");
  };

  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics as JSON");
  add_data(stats_cmd);

  std::string kind;
  std::string external;
  std::uint64_t seed = 0;
  double exp_scale = 1.0;
  std::string output;
  auto* synth_cmd = app.add_subcommand("synth", "Re-censor the uncensored subjects of a dataset");
  add_data(synth_cmd);
  synth_cmd->add_option("--kind", kind, "uniform|uniform-admin|exponential|orig-indep|orig-dep|external")
      ->required();
  synth_cmd->add_option("--external", external, "Reference dataset for the external kind");
  synth_cmd->add_option("--seed", seed, "Random seed");
  synth_cmd->add_option("--exp-scale", exp_scale, "Multiplier on the exponential censoring mean");
  synth_cmd->add_option("-o,--output", output, "Output CSV")->required();

  std::string curves_path;
  std::string method = "median";
  std::string train_path;
  auto* eval_cmd = app.add_subcommand("eval", "Score survival curves with every metric");
  add_data(eval_cmd);
  eval_cmd->add_option("--curves", curves_path, "Curve CSV (rows keyed by dataset row)")->required();
  eval_cmd->add_option("--method", method, "Predicted time: median or mean");
  eval_cmd->add_option("--train", train_path, "Training data for KM/censoring fits (default: the data itself)");
  eval_cmd->add_option("-o,--output", output, "Output JSON (default stdout)");

  std::string models = "km,coxph,weibull_aft";
  std::size_t k = 5;
  std::string csv_path;
  bool no_aux = false;
  auto* exp_cmd = app.add_subcommand("experiment", "Cross-validated comparison of metrics against true MAE");
  add_data(exp_cmd);
  exp_cmd->add_option("--models", models, "Comma list: km, coxph, weibull_aft, noisy:<sd>[:<scale>], curves:<path>");
  exp_cmd->add_option("--k", k, "Number of folds")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--seed", seed, "Random seed");
  exp_cmd->add_option("--method", method, "Predicted time: median or mean");
  exp_cmd->add_flag("--no-aux", no_aux, "Skip the non-MAE metrics");
  exp_cmd->add_option("-o,--output", output, "Report JSON")->required();
  exp_cmd->add_option("--csv", csv_path, "Per-fold CSV (default: report path with .csv)");

  std::string model = "coxph";
  std::string test_path;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a baseline model and write its curves");
  add_data(fit_cmd);
  fit_cmd->add_option("--model", model, "km, coxph or weibull_aft");
  fit_cmd->add_option("--test", test_path, "Subjects to predict (default: the training data)");
  fit_cmd->add_option("-o,--output", output, "Curve CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto ds = load_dataset(data, time_col, event_col);

    if (*stats_cmd) {
      auto j = stats_json(dataset_stats(ds));
      j["has_ground_truth"] = ds.has_ground_truth();
      j["features"] = ds.feature_names();
      std::cout << j.dump(2) << '\n';
    } else if (*synth_cmd) {
      CensoringSpec spec;
      spec.kind = parse_censoring_kind(kind);
      spec.external_path = external;
      spec.exp_scale = exp_scale;
      const auto result = make_semi_synthetic_detailed(ds, spec, seed);
      save_dataset(output, result.data);
      json meta{{"spec", {{"kind", std::string(to_string(spec.kind))}, {"exp_scale", exp_scale}}},
                {"seed", seed},
                {"source", data},
                {"n", result.data.size()},
                {"censor_rate", result.censor_rate},
                {"source_stats", stats_json(result.source_stats)}};
      if (!external.empty()) meta["spec"]["external"] = external;
      write_text(output + ".json", meta.dump(2));
      std::cerr << "wrote " << output << " (censor rate " << result.censor_rate << ")\n";
    } else if (*eval_cmd) {
      const auto table = load_curves(curves_path);
      const auto curves = table.first(ds.size());
      EvalOptions opts;
      opts.method = parse_time_method(method);
      const auto train = train_path.empty() ? ds : load_dataset(train_path, time_col, event_col);
      auto j = scores_json(evaluate_metrics(curves, train, ds, opts));
      write_text(output, j.dump(2));
    } else if (*exp_cmd) {
      ExperimentOptions opts;
      opts.k = k;
      opts.seed = seed;
      opts.eval.method = parse_time_method(method);
      opts.eval.aux_metrics = !no_aux;
      const auto report = run_experiment(ds, parse_model_list(models), opts);
      write_text(output, report_to_json(report));
      const auto csv = csv_path.empty() ? sibling(output, ".csv") : csv_path;
      std::ofstream out(csv);
      if (!out) throw ConfigError("cannot write " + csv);
      write_fold_csv(out, report);
      for (const auto& note : report.notes) std::cerr << "note: " << note << '\n';
    } else if (*fit_cmd) {
      const auto spec = parse_model_spec(model);
      if (spec.kind == ModelKind::noisy_oracle || spec.kind == ModelKind::external_curves) {
        throw ConfigError("fit supports km, coxph and weibull_aft");
      }
      const auto test = test_path.empty() ? ds : load_dataset(test_path, time_col, event_col);
      const auto curves = predict_curves(spec, ds, test, {}, seed);
      auto grid = ds.times();
      grid.push_back(0.0);
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      save_curves(output, grid, curves);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
