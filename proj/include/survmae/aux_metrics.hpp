#pragma once

#include <optional>
#include <span>
#include <vector>

#include "survmae/dataset.hpp"
#include "survmae/estimators.hpp"
#include "survmae/mae.hpp"
#include "survmae/step_curve.hpp"

namespace survmae {

struct CalibrationBin {
  double expected = 0.0;
  double observed = 0.0;
  std::size_t count = 0;
};

struct CalibrationResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t degrees_of_freedom = 0;
  std::vector<CalibrationBin> bin_table;
};

/// Time-independent concordance with risk -t_hat. A pair (i, j) is comparable when
/// t_i < t_j and i is uncensored; tied predictions score 0.5.
double concordance_index(const PredictedTimes& pred_times, const SurvivalDataset& ds);

/// Comparable pairs over n(n-1)/2.
double comparable_pair_ratio(const SurvivalDataset& ds);
std::size_t comparable_pair_count(const SurvivalDataset& ds);

/// IPCW Brier score at t_star using censoring fit g. Subjects with a zero weight
/// denominator are dropped from the average.
double brier_score_at(std::span<const StepCurve> curves, const SurvivalDataset& ds, double t_star,
                      const KaplanMeierFit& g);

/// Trapezoidal average of brier_score_at over `grid_size` uniform points on [0, t_max].
/// t_max defaults to the largest uncensored time in ds. A one-point grid evaluates at t_max.
double integrated_brier_score(std::span<const StepCurve> curves, const SurvivalDataset& ds, const KaplanMeierFit& g,
                              std::size_t grid_size = 100, std::optional<double> t_max = std::nullopt);

struct LogLikelihoodResult {
  double value = 0.0;       ///< mean log-likelihood; -inf when degenerate
  bool degenerate = false;  ///< some needed density or survival was zero
  double mean_bin_width = 0.0;  ///< curve granularity, for comparing discrete models
};

/// Mean of delta log f(t) + (1 - delta) log S(t). For a step curve f at t is the drop at
/// the knot closing t's interval divided by the interval width.
LogLikelihoodResult log_likelihood(std::span<const StepCurve> curves, const SurvivalDataset& ds);

/// Hosmer-Lemeshow test at t_star over equal-count bins sorted by S(t_star|x).
/// Expected events per bin are sum(1 - S); observed events come from a within-bin KM.
CalibrationResult one_calibration(std::span<const StepCurve> curves, const SurvivalDataset& ds, double t_star,
                                  std::size_t n_bins = 10);

/// D-calibration: Pearson chi-square of S(t_i|x_i) against a uniform histogram, censored
/// subjects spread over the bins below their survival probability.
CalibrationResult d_calibration(std::span<const StepCurve> curves, const SurvivalDataset& ds,
                                std::size_t n_bins = 10);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

}  // namespace survmae
