#include <algorithm>
#include <numeric>

#include "survmae/error.hpp"
#include "survmae/estimators.hpp"

namespace survmae {

namespace {

StepCurve build_curve(const std::vector<KmRow>& table, double max_time) {
  std::vector<double> knots{0.0};
  std::vector<double> values{1.0};
  double surv = 1.0;
  for (const auto& row : table) {
    surv *= static_cast<double>(row.at_risk - row.events) / static_cast<double>(row.at_risk);
    knots.push_back(row.time);
    values.push_back(surv);
  }
  if (max_time > knots.back()) {
    knots.push_back(max_time);
    values.push_back(surv);
  }
  return StepCurve(std::move(knots), std::move(values));
}

}  // namespace

KaplanMeierFit km_fit(std::span<const double> times, const std::vector<bool>& events) {
  if (times.empty()) throw DomainError("Kaplan-Meier fit needs at least one observation");
  if (times.size() != events.size()) throw DomainError("Kaplan-Meier fit: times and events differ in length");
  const std::size_t n = times.size();
  for (const double t : times) {
    if (!(t >= 0.0)) throw DomainError("Kaplan-Meier fit: negative or NaN time");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  std::vector<KmRow> table;
  std::size_t remaining = n;
  for (std::size_t pos = 0; pos < n;) {
    const double t = times[order[pos]];
    std::size_t d = 0;
    std::size_t tied = 0;
    while (pos < n && times[order[pos]] == t) {
      if (events[order[pos]]) ++d;
      ++tied;
      ++pos;
    }
    if (d > 0) table.push_back({t, remaining, d});
    remaining -= tied;
  }
  const double max_time = times[order.back()];
  auto curve = build_curve(table, max_time);
  return KaplanMeierFit{std::move(table), std::move(curve), n};
}

KaplanMeierFit km_fit(const SurvivalDataset& ds) {
  const auto times = ds.times();
  return km_fit(times, ds.events());
}

KaplanMeierFit censoring_km_fit(const SurvivalDataset& ds) {
  const auto times = ds.times();
  auto flipped = ds.events();
  flipped.flip();
  return km_fit(times, flipped);
}

}  // namespace survmae
