#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "survmae/curve_io.hpp"
#include "survmae/dataset.hpp"
#include "survmae/mae.hpp"
#include "survmae/step_curve.hpp"

namespace survmae {

enum class ModelKind { km, coxph, weibull_aft, noisy_oracle, external_curves };

struct ModelSpec {
  ModelKind kind = ModelKind::km;
  /// noisy_oracle: standard deviation of the log-scale error.
  double noise = 0.0;
  /// noisy_oracle: multiplies every predicted median (1 = centered on the truth).
  double scale = 1.0;
  /// external_curves: rows keyed by dataset row index.
  std::shared_ptr<const CurveTable> curves;
  std::filesystem::path curves_path;

  static ModelSpec of(ModelKind k) {
    ModelSpec s;
    s.kind = k;
    return s;
  }
  static ModelSpec km() { return of(ModelKind::km); }
  static ModelSpec coxph() { return of(ModelKind::coxph); }
  static ModelSpec weibull_aft() { return of(ModelKind::weibull_aft); }
  static ModelSpec noisy_oracle(double noise, double scale = 1.0);
  static ModelSpec external(std::shared_ptr<const CurveTable> table, std::filesystem::path path = {});

  /// Stable display name, e.g. "coxph" or "noisy:0.2".
  std::string name() const;
};

/// Parses "km", "coxph", "weibull_aft", "noisy:<sd>[:<scale>]" or "curves:<path>".
ModelSpec parse_model_spec(std::string_view text);
std::vector<ModelSpec> parse_model_list(std::string_view comma_separated);

/// Weibull-shaped curve per subject with median truth * scale * exp(noise * z), z standard
/// normal keyed by (seed, subject index). Throws MissingGroundTruthError.
std::vector<StepCurve> noisy_oracle_predictions(const SurvivalDataset& ds_test, double noise, std::uint64_t seed,
                                                double scale = 1.0);

/// Fits `spec` on train and returns one curve per test subject. `test_rows` are the test
/// subjects' row indices in the full dataset (used by external curves).
std::vector<StepCurve> predict_curves(const ModelSpec& spec, const SurvivalDataset& train,
                                      const SurvivalDataset& test, std::span<const std::size_t> test_rows,
                                      std::uint64_t seed);

namespace metric {
inline constexpr const char* uncensored = "mae_uncensored";
inline constexpr const char* hinge = "mae_hinge";
inline constexpr const char* margin = "mae_margin";
inline constexpr const char* ipcw_d = "mae_ipcw_d";
inline constexpr const char* ipcw_t = "mae_ipcw_t";
inline constexpr const char* po = "mae_po";
inline constexpr const char* pop_po = "mae_pop_po";
inline constexpr const char* truth = "true_mae";
inline constexpr const char* c_index = "c_index";
inline constexpr const char* ibs = "ibs";
inline constexpr const char* log_lik = "log_likelihood";
inline constexpr const char* one_cal_p = "one_calibration_p";
inline constexpr const char* d_cal_p = "d_calibration_p";
}  // namespace metric

/// The MAE-family metrics compared against true MAE, true MAE included.
const std::vector<std::string>& mae_metric_names();
const std::vector<std::string>& aux_metric_names();

using MetricScores = std::map<std::string, std::optional<double>>;

struct EvalOptions {
  TimeMethod method = TimeMethod::median;
  bool aux_metrics = true;
  std::size_t ibs_grid = 100;
  std::size_t calibration_bins = 10;
};

/// Scores test curves. Training data supplies the margin KM, the censoring KM, the IBS
/// horizon and the 1-calibration time. Undefined metrics come back empty.
MetricScores evaluate_metrics(std::span<const StepCurve> curves, const SurvivalDataset& train,
                              const SurvivalDataset& test, const EvalOptions& options = {});

struct RankAgreement {
  double kendall_tau = 1.0;
  std::size_t top3_overlap = 0;
};

/// Kendall tau-b between two score vectors (1 for fewer than two entries).
double kendall_tau_b(std::span<const double> a, std::span<const double> b);

/// Models ordered by ascending score, ties broken by name.
std::vector<std::string> rank_models(const std::map<std::string, double>& scores);

/// Throws DomainError when the key sets differ.
RankAgreement rank_agreement(const std::map<std::string, double>& true_scores,
                             const std::map<std::string, double>& metric_scores);

struct MetricAgreement {
  double kendall_tau = 1.0;
  std::size_t top3_overlap = 0;
  double abs_gap_to_true = 0.0;
  std::size_t models_compared = 0;
};

struct ExperimentOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  EvalOptions eval;
};

struct ExperimentReport {
  std::vector<std::string> models;
  std::vector<std::string> metrics;
  std::size_t folds = 0;
  /// model -> metric -> per-fold value
  std::map<std::string, std::map<std::string, std::vector<std::optional<double>>>> per_fold_scores;
  std::map<std::string, std::map<std::string, std::optional<double>>> mean_scores;
  std::vector<std::string> true_mae_rank;
  std::map<std::string, std::vector<std::string>> per_metric_rank;
  std::map<std::string, MetricAgreement> agreement;
  /// Non-fatal problems (failed fits and the like), in encounter order.
  std::vector<std::string> notes;

  std::optional<double> mean(const std::string& model, const std::string& metric) const;
};

ExperimentReport run_experiment(const SurvivalDataset& ds, const std::vector<ModelSpec>& models,
                                const ExperimentOptions& options);
ExperimentReport run_experiment(const SurvivalDataset& ds, const std::vector<ModelSpec>& models, std::size_t k,
                                std::uint64_t seed);

/// JSON document for the report.
std::string report_to_json(const ExperimentReport& report, int indent = 2);
/// Flat `model,metric,fold,value` rows, empty value for missing cells.
void write_fold_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace survmae
