#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "survmae/error.hpp"
#include "survmae/estimators.hpp"

namespace survmae {

namespace {

constexpr double kSeparationBound = 50.0;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct CoxData {
  Mat x;                                 // centered features, rows sorted by descending time
  std::vector<double> time;              // descending
  std::vector<bool> event;
  std::vector<std::size_t> group_start;  // start row of each block of tied times
};

CoxData prepare(const SurvivalDataset& ds, std::span<const double> means) {
  const std::size_t n = ds.size();
  const std::size_t p = ds.dimension();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ds[a].time > ds[b].time; });

  CoxData data;
  data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = ds[order[r]];
    for (std::size_t c = 0; c < p; ++c) {
      data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rec.features[c] - means[c];
    }
    data.time.push_back(rec.time);
    data.event.push_back(rec.event);
    if (r == 0 || data.time[r] != data.time[r - 1]) data.group_start.push_back(r);
  }
  return data;
}

struct Derivatives {
  double loglik = 0.0;
  Vec score;
  Mat info;  // negative Hessian
};

// Cumulative sums run from the latest time backwards so each block of tied times sees
// its full risk set {j : t_j >= t_k}.
Derivatives evaluate(const CoxData& data, const Vec& beta, bool with_info) {
  const auto n = data.x.rows();
  const auto p = data.x.cols();
  const Vec eta = data.x * beta;
  const double shift = n > 0 ? eta.maxCoeff() : 0.0;

  Derivatives out;
  out.score = Vec::Zero(p);
  if (with_info) out.info = Mat::Zero(p, p);

  double s0 = 0.0;
  Vec s1 = Vec::Zero(p);
  Mat s2 = with_info ? Mat::Zero(p, p) : Mat();

  const std::size_t groups = data.group_start.size();
  for (std::size_t g = 0; g < groups; ++g) {
    const auto begin = static_cast<Eigen::Index>(data.group_start[g]);
    const auto end = static_cast<Eigen::Index>(g + 1 < groups ? data.group_start[g + 1] : static_cast<std::size_t>(n));
    double d = 0.0;
    double eta_events = 0.0;
    Vec x_events = Vec::Zero(p);
    for (Eigen::Index r = begin; r < end; ++r) {
      const double w = std::exp(eta(r) - shift);
      s0 += w;
      s1 += w * data.x.row(r).transpose();
      if (with_info) s2.noalias() += w * data.x.row(r).transpose() * data.x.row(r);
      if (data.event[static_cast<std::size_t>(r)]) {
        d += 1.0;
        eta_events += eta(r);
        x_events += data.x.row(r).transpose();
      }
    }
    if (d == 0.0) continue;
    const Vec mean = s1 / s0;
    out.loglik += eta_events - d * (std::log(s0) + shift);
    out.score += x_events - d * mean;
    if (with_info) out.info += d * (s2 / s0 - mean * mean.transpose());
  }
  return out;
}

// Likelihood is monotone along `dir` when every event has the largest dir.x in its
// risk set, with at least one strict gap.
bool monotone_along(const CoxData& data, const Vec& dir) {
  if (dir.norm() == 0.0) return false;
  const Vec proj = data.x * dir;
  const double scale = 1e-9 * (1.0 + proj.cwiseAbs().maxCoeff());
  double risk_max = -std::numeric_limits<double>::infinity();
  double risk_min = std::numeric_limits<double>::infinity();
  bool strict = false;
  const std::size_t groups = data.group_start.size();
  const auto n = static_cast<std::size_t>(data.x.rows());
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = data.group_start[g];
    const std::size_t end = g + 1 < groups ? data.group_start[g + 1] : n;
    for (std::size_t r = begin; r < end; ++r) {
      risk_max = std::max(risk_max, proj(static_cast<Eigen::Index>(r)));
      risk_min = std::min(risk_min, proj(static_cast<Eigen::Index>(r)));
    }
    for (std::size_t r = begin; r < end; ++r) {
      if (!data.event[r]) continue;
      const double v = proj(static_cast<Eigen::Index>(r));
      if (v < risk_max - scale) return false;
      if (v > risk_min + scale) strict = true;
    }
  }
  return strict;
}

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<double> column_means(const SurvivalDataset& ds) {
  std::vector<double> means(ds.dimension(), 0.0);
  for (const auto& r : ds.records()) {
    for (std::size_t c = 0; c < means.size(); ++c) means[c] += r.features[c];
  }
  for (auto& m : means) m /= static_cast<double>(ds.size());
  return means;
}

}  // namespace

double CumulativeHazard::operator()(double t) const {
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return 0.0;
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

double CoxModel::linear_predictor(std::span<const double> x) const {
  if (x.size() != beta.size()) throw DomainError("feature vector dimension does not match the Cox model");
  double lp = 0.0;
  for (std::size_t c = 0; c < beta.size(); ++c) lp += beta[c] * (x[c] - feature_means[c]);
  return lp;
}

double cox_partial_loglik(const SurvivalDataset& ds, std::span<const double> beta, std::span<const double> means) {
  const auto data = prepare(ds, means);
  const Vec b = Eigen::Map<const Vec>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  return evaluate(data, b, false).loglik;
}

CoxModel coxph_fit(const SurvivalDataset& ds, const FitOptions& options) {
  if (ds.event_count() == 0) throw InsufficientEventsError("Cox fit needs at least one event");
  const auto means = column_means(ds);
  const auto data = prepare(ds, means);
  const auto p = static_cast<Eigen::Index>(ds.dimension());
  const double n = static_cast<double>(ds.size());

  CoxModel model;
  model.feature_means = means;
  Vec beta = Vec::Zero(p);
  auto current = evaluate(data, beta, true);

  bool converged = p == 0;
  std::size_t iter = 0;
  for (; iter < options.max_iter && !converged; ++iter) {
    if (current.score.cwiseAbs().maxCoeff() / n < options.tol) {
      converged = true;
      break;
    }
    // Newton direction; fall back to a ridge-stabilized system when the
    // information matrix is not numerically positive definite.
    Vec step;
    Eigen::LLT<Mat> llt(current.info);
    if (llt.info() == Eigen::Success) {
      step = llt.solve(current.score);
    } else {
      const double ridge = 1e-8 + 1e-6 * current.info.diagonal().cwiseAbs().maxCoeff();
      step = (current.info + ridge * Mat::Identity(p, p)).ldlt().solve(current.score);
    }

    double factor = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, factor *= 0.5) {
      const Vec trial = beta + factor * step;
      const auto next = evaluate(data, trial, true);
      if (std::isfinite(next.loglik) && next.loglik >= current.loglik - 1e-12 * (1.0 + std::abs(current.loglik))) {
        beta = trial;
        current = next;
        accepted = true;
        break;
      }
    }
    if (beta.cwiseAbs().maxCoeff() > kSeparationBound) {
      throw SeparationError("Cox partial likelihood is monotone: a coefficient exceeded 50 in magnitude");
    }
    if (!accepted) break;
  }

  if (!converged && current.score.cwiseAbs().maxCoeff() / n < options.tol) converged = true;
  if (converged && monotone_along(data, beta)) {
    throw SeparationError("Cox partial likelihood is monotone in the fitted direction (separated covariates)");
  }
  if (!converged) {
    throw ConvergenceError("Cox fit did not converge within " + std::to_string(options.max_iter) + " iterations",
                           to_std(beta));
  }

  model.beta = to_std(beta);
  model.iterations = iter;
  model.baseline_cumhaz = breslow_baseline(model, ds);
  return model;
}

CumulativeHazard breslow_baseline(const CoxModel& model, const SurvivalDataset& ds) {
  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ds[a].time > ds[b].time; });

  // Walk backwards accumulating the risk-set sum, then emit increments in time order.
  std::vector<std::pair<double, double>> increments;  // (t_k, d_k / S0_k), descending
  double s0 = 0.0;
  for (std::size_t pos = 0; pos < n;) {
    const double t = ds[order[pos]].time;
    double d = 0.0;
    while (pos < n && ds[order[pos]].time == t) {
      const auto& rec = ds[order[pos]];
      s0 += std::exp(model.linear_predictor(rec.features));
      if (rec.event) d += 1.0;
      ++pos;
    }
    if (d > 0.0) {
      if (!(s0 > 0.0)) throw Error("Breslow baseline: empty risk set");
      increments.emplace_back(t, d / s0);
    }
  }

  CumulativeHazard h;
  h.knots.push_back(0.0);
  h.values.push_back(0.0);
  double total = 0.0;
  for (auto it = increments.rbegin(); it != increments.rend(); ++it) {
    total += it->second;
    h.knots.push_back(it->first);
    h.values.push_back(total);
  }
  const double max_time = ds[order.front()].time;
  if (max_time > h.knots.back()) {
    h.knots.push_back(max_time);
    h.values.push_back(total);
  }
  return h;
}

StepCurve cox_survival_curve(const CoxModel& model, std::span<const double> x) {
  const double risk = std::exp(model.linear_predictor(x));
  const auto& h = model.baseline_cumhaz;
  std::vector<double> values;
  values.reserve(h.values.size());
  for (const double cum : h.values) values.push_back(cum == 0.0 ? 1.0 : std::exp(-cum * risk));
  return StepCurve(h.knots, std::move(values));
}

}  // namespace survmae
