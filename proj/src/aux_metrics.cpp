#include "survmae/aux_metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "survmae/error.hpp"

namespace survmae {

namespace {

void require_curves(std::span<const StepCurve> curves, const SurvivalDataset& ds, const char* what) {
  if (curves.size() != ds.size()) {
    throw DomainError(std::string(what) + ": " + std::to_string(curves.size()) + " curves for " +
                      std::to_string(ds.size()) + " subjects");
  }
}

}  // namespace

double chi_square_sf(double statistic, double dof) {
  if (!(statistic > 0.0)) return 1.0;
  if (!std::isfinite(statistic)) return 0.0;
  const boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double concordance_index(const PredictedTimes& pred_times, const SurvivalDataset& ds) {
  if (pred_times.size() != ds.size()) throw DomainError("C-index: prediction count does not match dataset");
  double concordant = 0.0;
  std::size_t comparable = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds[i].event) continue;
    for (std::size_t j = 0; j < ds.size(); ++j) {
      if (!(ds[i].time < ds[j].time)) continue;
      ++comparable;
      if (pred_times[i] < pred_times[j]) {
        concordant += 1.0;
      } else if (pred_times[i] == pred_times[j]) {
        concordant += 0.5;
      }
    }
  }
  if (comparable == 0) throw UndefinedMetricError("C-index: no comparable pairs");
  return concordant / static_cast<double>(comparable);
}

std::size_t comparable_pair_count(const SurvivalDataset& ds) {
  auto times = ds.times();
  std::sort(times.begin(), times.end());
  std::size_t count = 0;
  for (const auto& r : ds.records()) {
    if (!r.event) continue;
    count += static_cast<std::size_t>(times.end() - std::upper_bound(times.begin(), times.end(), r.time));
  }
  return count;
}

double comparable_pair_ratio(const SurvivalDataset& ds) {
  const std::size_t n = ds.size();
  if (n < 2) throw DomainError("comparable-pair ratio needs at least two subjects");
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(comparable_pair_count(ds)) / pairs;
}

double brier_score_at(std::span<const StepCurve> curves, const SurvivalDataset& ds, double t_star,
                      const KaplanMeierFit& g) {
  require_curves(curves, ds, "Brier score");
  if (!(t_star >= 0.0)) throw DomainError("Brier score time must be nonnegative");
  const double g_star = g.curve(t_star);
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double s = curves[i](t_star);
    const auto& r = ds[i];
    if (r.time <= t_star) {
      if (!r.event) {
        ++used;  // censored before t*: no direct contribution
        continue;
      }
      const double w = g.curve.left_limit(r.time);
      if (!(w > 0.0)) continue;
      total += s * s / w;
      ++used;
    } else {
      if (!(g_star > 0.0)) continue;
      total += (1.0 - s) * (1.0 - s) / g_star;
      ++used;
    }
  }
  if (used == 0) throw UndefinedMetricError("Brier score: every subject has a zero censoring weight");
  return total / static_cast<double>(used);
}

double integrated_brier_score(std::span<const StepCurve> curves, const SurvivalDataset& ds, const KaplanMeierFit& g,
                              std::size_t grid_size, std::optional<double> t_max) {
  if (grid_size == 0) throw ConfigError("IBS grid needs at least one point");
  double horizon = 0.0;
  if (t_max) {
    horizon = *t_max;
  } else {
    bool any = false;
    for (const auto& r : ds.records()) {
      if (r.event) {
        horizon = std::max(horizon, r.time);
        any = true;
      }
    }
    if (!any) throw UndefinedMetricError("IBS: no uncensored subject to set the time horizon");
  }
  if (!(horizon > 0.0)) throw DomainError("IBS horizon must be positive");
  if (grid_size == 1) return brier_score_at(curves, ds, horizon, g);

  const double step = horizon / static_cast<double>(grid_size - 1);
  double area = 0.0;
  double prev = brier_score_at(curves, ds, 0.0, g);
  for (std::size_t j = 1; j < grid_size; ++j) {
    const double t = j + 1 == grid_size ? horizon : step * static_cast<double>(j);
    const double cur = brier_score_at(curves, ds, t, g);
    area += 0.5 * (prev + cur) * step;
    prev = cur;
  }
  return area / horizon;
}

LogLikelihoodResult log_likelihood(std::span<const StepCurve> curves, const SurvivalDataset& ds) {
  require_curves(curves, ds, "log-likelihood");
  LogLikelihoodResult result;
  double total = 0.0;
  double widths = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& c = curves[i];
    const auto& r = ds[i];
    widths += c.size() > 1 ? (c.last_time() - c.knots().front()) / static_cast<double>(c.size() - 1) : c.last_time();
    double contribution = 0.0;
    if (r.event) {
      const auto knots = c.knots();
      const auto values = c.values();
      const auto k = static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), r.time) - knots.begin());
      if (k == knots.size()) {
        result.degenerate = true;
        continue;
      }
      const double prev_value = k == 0 ? 1.0 : values[k - 1];
      const double prev_knot = k == 0 ? 0.0 : knots[k - 1];
      const double density = (prev_value - values[k]) / (knots[k] - prev_knot);
      if (!(density > 0.0)) {
        result.degenerate = true;
        continue;
      }
      contribution = std::log(density);
    } else {
      const double s = c(r.time);
      if (!(s > 0.0)) {
        result.degenerate = true;
        continue;
      }
      contribution = std::log(s);
    }
    total += contribution;
  }
  result.mean_bin_width = widths / static_cast<double>(ds.size());
  result.value = result.degenerate ? -std::numeric_limits<double>::infinity() : total / static_cast<double>(ds.size());
  return result;
}

CalibrationResult one_calibration(std::span<const StepCurve> curves, const SurvivalDataset& ds, double t_star,
                                  std::size_t n_bins) {
  require_curves(curves, ds, "1-calibration");
  if (n_bins < 2) throw ConfigError("1-calibration needs at least two bins");
  const std::size_t n = ds.size();
  if (n < n_bins) throw ConfigError("1-calibration: fewer subjects than bins leaves a bin empty");

  std::vector<double> surv(n);
  for (std::size_t i = 0; i < n; ++i) surv[i] = curves[i](t_star);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return surv[a] < surv[b]; });

  CalibrationResult result;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t lo = b * n / n_bins;
    const std::size_t hi = (b + 1) * n / n_bins;
    std::vector<double> times;
    std::vector<bool> events;
    double expected = 0.0;
    for (std::size_t pos = lo; pos < hi; ++pos) {
      const std::size_t i = order[pos];
      expected += 1.0 - surv[i];
      times.push_back(ds[i].time);
      events.push_back(ds[i].event);
    }
    const auto count = static_cast<double>(hi - lo);
    const auto km = km_fit(times, events);
    const double observed = count * (1.0 - km.curve(t_star));
    result.bin_table.push_back({expected, observed, hi - lo});

    double e = expected;
    if (e == 0.0) e = 0.5;
    if (e == count) e = count - 0.5;
    const double variance = e * (1.0 - e / count);
    if (variance > 0.0) result.statistic += (observed - e) * (observed - e) / variance;
  }
  result.degrees_of_freedom = n_bins > 2 ? n_bins - 2 : 1;
  result.p_value = chi_square_sf(result.statistic, static_cast<double>(result.degrees_of_freedom));
  return result;
}

CalibrationResult d_calibration(std::span<const StepCurve> curves, const SurvivalDataset& ds, std::size_t n_bins) {
  require_curves(curves, ds, "D-calibration");
  if (n_bins < 2) throw ConfigError("D-calibration needs at least two bins");
  const double width = 1.0 / static_cast<double>(n_bins);
  const auto bin_of = [&](double p) {
    return std::min(static_cast<std::size_t>(std::floor(p * static_cast<double>(n_bins))), n_bins - 1);
  };

  std::vector<double> mass(n_bins, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double p = curves[i](ds[i].time);
    if (ds[i].event) {
      mass[bin_of(p)] += 1.0;
      continue;
    }
    if (!(p > 0.0)) {
      mass[0] += 1.0;
      continue;
    }
    const std::size_t b = bin_of(p);
    const double lower = static_cast<double>(b) * width;
    mass[b] += (p - lower) / p;
    for (std::size_t k = 0; k < b; ++k) mass[k] += width / p;
  }

  CalibrationResult result;
  const double expected = static_cast<double>(ds.size()) / static_cast<double>(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    result.statistic += (mass[b] - expected) * (mass[b] - expected) / expected;
    result.bin_table.push_back({expected, mass[b], 0});
  }
  result.degrees_of_freedom = n_bins - 1;
  result.p_value = chi_square_sf(result.statistic, static_cast<double>(result.degrees_of_freedom));
  return result;
}

}  // namespace survmae
