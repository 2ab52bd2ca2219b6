#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "support.hpp"
#include "survmae/error.hpp"
#include "survmae/estimators.hpp"
#include "survmae/synth.hpp"

using namespace survmae;
using namespace survmae::testing;

namespace {

CensoringSpec spec_of(CensoringKind kind) {
  CensoringSpec s;
  s.kind = kind;
  return s;
}

void check_truth_consistency(const SurvivalDataset& ds) {
  for (const auto& r : ds.records()) {
    REQUIRE(r.true_event_time.has_value());
    CHECK(*r.true_event_time >= r.time);
    CHECK((*r.true_event_time == r.time) == r.event);
  }
}

// Raw data whose censoring hazard rises with the first feature.
SurvivalDataset dependent_censoring_world(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::exponential_distribution<double> unit(1.0);
  std::vector<SurvivalRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = norm(rng);
    const double x2 = norm(rng);
    const double e = 10.0 * unit(rng);
    const double c = 10.0 * unit(rng) * std::exp(-0.8 * x1);
    recs.push_back({{x1, x2}, std::min(e, c), e <= c, std::nullopt});
  }
  return SurvivalDataset(std::move(recs), {"x1", "x2"});
}

}  // namespace

TEST_CASE("flip_censor_bits") {
  const auto ds = make_dataset({1, 2}, {1, 0});
  const auto f = flip_censor_bits(ds);
  CHECK_FALSE(f[0].event);
  CHECK(f[1].event);
  CHECK(f[0].time == 1.0);
  Rng rng(1);
  const auto r = random_dataset(rng, {.n = 40, .censor_rate = 0.3, .dim = 2});
  const auto twice = flip_censor_bits(flip_censor_bits(r));
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(twice[i].event == r[i].event);
    CHECK(twice[i].time == r[i].time);
    CHECK(twice[i].features == r[i].features);
  }
  CHECK(flip_censor_bits(r).censor_rate() == doctest::Approx(1.0 - r.censor_rate()));
}

TEST_CASE("keep_uncensored") {
  const auto d = keep_uncensored(make_dataset({1, 2, 3}, {1, 0, 1}));
  REQUIRE(d.size() == 2);
  CHECK(d[0].time == 1.0);
  CHECK(d[1].time == 3.0);
  CHECK(d[0].true_event_time == 1.0);
  CHECK(d[1].true_event_time == 3.0);
  const auto all = keep_uncensored(make_dataset({1, 2}, {1, 1}));
  CHECK(all.size() == 2);
  CHECK(all.has_ground_truth());
  CHECK_THROWS_AS(keep_uncensored(make_dataset({1, 2}, {0, 0})), DomainError);
}

TEST_CASE("censor-time samplers respect their supports") {
  const auto raw = weibull_world(3, {.n = 2000});
  const auto d_prime = keep_uncensored(raw);
  const auto stats = dataset_stats(d_prime);
  const CensoringModels none;

  const auto uni = sample_censor_times(spec_of(CensoringKind::uniform), d_prime, stats, none, 1);
  for (const double c : uni) {
    CHECK(c > 0.0);
    CHECK(c <= stats.t_max_event);
  }
  const auto admin = sample_censor_times(spec_of(CensoringKind::uniform_admin), d_prime, stats, none, 1);
  for (const double c : admin) CHECK(c <= stats.t_median_event);
  CHECK(std::count(admin.begin(), admin.end(), stats.t_median_event) > 0);

  CHECK_THROWS_AS(sample_censor_times(spec_of(CensoringKind::original_independent), d_prime, stats, none, 1),
                  ConfigError);
  CHECK_THROWS_AS(sample_censor_times(spec_of(CensoringKind::original_dependent), d_prime, stats, none, 1),
                  ConfigError);
  CHECK_THROWS_AS(spec_of(CensoringKind::external).validate(), ConfigError);
}

TEST_CASE("exponential sampler has mean sigma_t") {
  std::vector<double> t(100000, 1.0);
  const auto d_prime = keep_uncensored(make_dataset(t, std::vector<int>(t.size(), 1)));
  DatasetStats stats;
  stats.sigma_event = 4.0;
  stats.t_max_event = 1.0;
  stats.t_median_event = 1.0;
  const auto c = sample_censor_times(spec_of(CensoringKind::exponential), d_prime, stats, {}, 77);
  const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  CHECK(mean >= 3.95);
  CHECK(mean <= 4.05);
}

TEST_CASE("apply_censoring") {
  const auto d = keep_uncensored(make_dataset({3}, {1}));
  const auto cens = apply_censoring(d, {2.0});
  CHECK(cens[0].time == 2.0);
  CHECK_FALSE(cens[0].event);
  CHECK(cens[0].true_event_time == 3.0);
  const auto tie = apply_censoring(d, {3.0});
  CHECK(tie[0].event);
  CHECK(tie[0].time == 3.0);
  Rng rng(2);
  const auto many = keep_uncensored(random_dataset(rng, {.n = 30, .censor_rate = 0.0, .dim = 1}));
  const auto same = apply_censoring(many, std::vector<double>(many.size(), std::numeric_limits<double>::infinity()));
  for (std::size_t i = 0; i < many.size(); ++i) {
    CHECK(same[i].time == many[i].time);
    CHECK(same[i].event);
    CHECK(same[i].features == many[i].features);
  }
  CHECK_THROWS_AS(apply_censoring(d, {1.0, 2.0}), DomainError);
}

TEST_CASE("make_semi_synthetic: determinism, identity and censor rate") {
  const auto raw = weibull_world(4, {.n = 1500});
  for (const auto kind : {CensoringKind::uniform, CensoringKind::uniform_admin, CensoringKind::exponential,
                          CensoringKind::original_independent, CensoringKind::original_dependent}) {
    const auto a = make_semi_synthetic_detailed(raw, spec_of(kind), 11);
    const auto b = make_semi_synthetic_detailed(raw, spec_of(kind), 11);
    REQUIRE(a.data.size() == b.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      CHECK(a.data[i].time == b.data[i].time);
      CHECK(a.data[i].event == b.data[i].event);
    }
    CHECK(a.censor_rate > 0.0);
    CHECK(a.censor_rate < 1.0);
    check_truth_consistency(a.data);
  }

  auto ext = spec_of(CensoringKind::external);
  ext.external_data = std::make_shared<const SurvivalDataset>(raw);
  const auto via_ext = make_semi_synthetic(raw, ext, 5);
  const auto via_orig = make_semi_synthetic(raw, spec_of(CensoringKind::original_independent), 5);
  for (std::size_t i = 0; i < raw.event_count(); ++i) {
    CHECK(via_ext[i].time == via_orig[i].time);
    CHECK(via_ext[i].event == via_orig[i].event);
  }
}

TEST_CASE("external censoring rescales to the target range") {
  const auto raw = weibull_world(6, {.n = 800});
  std::vector<SurvivalRecord> stretched(raw.records().begin(), raw.records().end());
  for (auto& r : stretched) r.time *= 3.0;
  auto ext = spec_of(CensoringKind::external);
  ext.external_data = std::make_shared<const SurvivalDataset>(SurvivalDataset(stretched, raw.feature_names()));
  const auto a = make_semi_synthetic(raw, ext, 9);
  const auto b = make_semi_synthetic(raw, spec_of(CensoringKind::original_independent), 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].time == doctest::Approx(b[i].time).epsilon(1e-12));
  }
}

TEST_CASE("kind names") {
  CHECK(parse_censoring_kind("uniform-admin") == CensoringKind::uniform_admin);
  CHECK(parse_censoring_kind("orig-dep") == CensoringKind::original_dependent);
  CHECK(to_string(CensoringKind::original_independent) == "orig-indep");
  CHECK_THROWS_AS(parse_censoring_kind("weird"), ConfigError);
}

TEST_CASE("property: inverse-transform fidelity and residual mass") {
  const auto raw = weibull_world(8, {.n = 3000, .raw_censor_mean = 12.0});
  const auto models = fit_censoring_models(raw, spec_of(CensoringKind::original_independent));
  REQUIRE(models.km.has_value());
  const auto& g = models.km->curve;
  std::vector<double> t(100000, 1.0);
  const auto d_prime = keep_uncensored(make_dataset(t, std::vector<int>(t.size(), 1)));
  const auto samples =
      sample_censor_times(spec_of(CensoringKind::original_independent), d_prime, {}, models, 123);
  auto sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted.back() <= g.last_time());
  double ks = 0.0;
  for (const double knot : g.knots()) {
    const double emp = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), knot) - sorted.begin()) /
                       static_cast<double>(sorted.size());
    ks = std::max(ks, std::abs(emp - (1.0 - g(knot))));
  }
  MESSAGE("KS distance " << ks);
  CHECK(ks < 0.01);
  // Residual tail mass lands on the last knot.
  const double at_end = static_cast<double>(std::count(sorted.begin(), sorted.end(), g.last_time())) / sorted.size();
  CHECK(at_end == doctest::Approx(g.left_limit(g.last_time())).epsilon(0.1));
}

TEST_CASE("property: feature-dependent censoring is earlier for high-risk subjects") {
  const auto raw = dependent_censoring_world(10, 30000);
  const auto models = fit_censoring_models(raw, spec_of(CensoringKind::original_dependent));
  REQUIRE(models.cox.has_value());
  CHECK(models.cox->beta[0] > 0.0);
  auto d_prime = keep_uncensored(raw);
  std::vector<std::size_t> idx(10000);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  d_prime = d_prime.subset(idx);
  const auto c = sample_censor_times(spec_of(CensoringKind::original_dependent), d_prime, {}, models, 4);

  std::vector<std::size_t> order(d_prime.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d_prime[a].features[0] < d_prime[b].features[0]; });
  const std::size_t q = order.size() / 4;
  std::vector<std::pair<double, int>> pooled;  // (time, group): 0 = bottom quartile, 1 = top
  for (std::size_t k = 0; k < q; ++k) pooled.emplace_back(c[order[k]], 0);
  for (std::size_t k = order.size() - q; k < order.size(); ++k) pooled.emplace_back(c[order[k]], 1);
  std::sort(pooled.begin(), pooled.end());
  double rank_sum_top = 0.0;
  for (std::size_t a = 0; a < pooled.size();) {
    std::size_t b = a;
    while (b < pooled.size() && pooled[b].first == pooled[a].first) ++b;
    const double avg_rank = 0.5 * static_cast<double>(a + 1 + b);
    for (std::size_t k = a; k < b; ++k) {
      if (pooled[k].second == 1) rank_sum_top += avg_rank;
    }
    a = b;
  }
  const double n1 = static_cast<double>(q);
  const double u_top = rank_sum_top - n1 * (n1 + 1.0) / 2.0;
  const double z = (u_top - n1 * n1 / 2.0) / std::sqrt(n1 * n1 * (2.0 * n1 + 1.0) / 12.0);
  const double p_one_sided = 0.5 * std::erfc(-z / std::sqrt(2.0));
  MESSAGE("Mann-Whitney z " << z);
  CHECK(p_one_sided < 0.01);
}
