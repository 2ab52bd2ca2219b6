#include <algorithm>
#include <cmath>

#include "survmae/error.hpp"
#include "survmae/estimators.hpp"

namespace survmae {

namespace {

// Log-likelihood and its derivatives in a = log(shape), b = log(scale).
struct WeibullState {
  double loglik = 0.0;
  double ga = 0.0, gb = 0.0;           // gradient
  double haa = 0.0, hab = 0.0, hbb = 0.0;  // Hessian
};

WeibullState weibull_state(const SurvivalDataset& ds, double a, double b) {
  const double k = std::exp(a);
  WeibullState s;
  double events = 0.0, sum_u = 0.0, sum_uz = 0.0, sum_uzz = 0.0, sum_dz = 0.0;
  for (const auto& r : ds.records()) {
    const double log_t = std::log(r.time);
    const double z = k * (log_t - b);
    const double u = std::exp(z);
    if (r.event) {
      events += 1.0;
      sum_dz += z;
      s.loglik += a + (k - 1.0) * log_t - k * b;
    }
    s.loglik -= u;
    sum_u += u;
    sum_uz += u * z;
    sum_uzz += u * z * z;
  }
  s.ga = events + sum_dz - sum_uz;
  s.gb = k * (sum_u - events);
  s.haa = sum_dz - sum_uzz - sum_uz;
  s.hab = k * (sum_u - events) + k * sum_uz;
  s.hbb = -k * k * sum_u;
  return s;
}

}  // namespace

double WeibullAFTModel::survival(double t) const { return std::exp(-std::pow(t / scale, shape)); }

StepCurve WeibullAFTModel::curve(std::span<const double> grid) const {
  std::vector<double> knots;
  std::vector<double> values;
  if (grid.empty() || grid.front() > 0.0) {
    knots.push_back(0.0);
    values.push_back(1.0);
  }
  for (const double t : grid) {
    knots.push_back(t);
    values.push_back(t == 0.0 ? 1.0 : survival(t));
  }
  return StepCurve(std::move(knots), std::move(values));
}

double weibull_loglik(const SurvivalDataset& ds, double shape, double scale) {
  return weibull_state(ds, std::log(shape), std::log(scale)).loglik;
}

WeibullAFTModel weibull_aft_fit(const SurvivalDataset& ds, const FitOptions& options) {
  const double events = static_cast<double>(ds.event_count());
  if (events == 0.0) throw InsufficientEventsError("Weibull fit needs at least one event");
  const double n = static_cast<double>(ds.size());

  // Start from the exponential MLE: shape 1, scale = total time / events.
  double total = 0.0;
  for (const auto& r : ds.records()) total += r.time;
  double a = 0.0;
  double b = std::log(total / events);
  auto state = weibull_state(ds, a, b);

  std::size_t iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (std::max(std::abs(state.ga), std::abs(state.gb)) / n < options.tol) {
      return WeibullAFTModel{std::exp(a), std::exp(b), iter};
    }
    // Newton on the concave log-likelihood; gradient ascent when the Hessian is not
    // negative definite.
    double da, db;
    const double det = state.haa * state.hbb - state.hab * state.hab;
    if (state.haa < 0.0 && det > 0.0) {
      da = -(state.hbb * state.ga - state.hab * state.gb) / det;
      db = -(-state.hab * state.ga + state.haa * state.gb) / det;
    } else {
      const double norm = std::hypot(state.ga, state.gb);
      da = state.ga / norm * 0.1;
      db = state.gb / norm * 0.1;
    }
    // Cap the raw step so exp() stays finite on the first iterations.
    const double cap = std::max(std::abs(da), std::abs(db));
    if (cap > 1.0) {
      da /= cap;
      db /= cap;
    }

    double factor = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, factor *= 0.5) {
      const auto trial = weibull_state(ds, a + factor * da, b + factor * db);
      if (std::isfinite(trial.loglik) && trial.loglik >= state.loglik - 1e-12 * (1.0 + std::abs(state.loglik))) {
        a += factor * da;
        b += factor * db;
        state = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (std::max(std::abs(state.ga), std::abs(state.gb)) / n < options.tol) {
    return WeibullAFTModel{std::exp(a), std::exp(b), iter};
  }
  throw ConvergenceError("Weibull fit did not converge", {std::exp(a), std::exp(b)});
}

}  // namespace survmae
