#include "survmae/folds.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "survmae/error.hpp"

namespace survmae {

std::vector<std::size_t> FoldSplit::complement(std::size_t k) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f == k) continue;
    out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldSplit stratified_kfold(const SurvivalDataset& ds, std::size_t k, std::uint64_t seed, std::size_t time_bins) {
  const std::size_t n = ds.size();
  if (k < 2) throw ConfigError("k-fold split needs k >= 2");
  if (k > n) throw ConfigError("k-fold split needs k <= number of records");
  if (time_bins == 0) throw ConfigError("stratification needs at least one time bin");

  std::vector<std::size_t> by_time(n);
  std::iota(by_time.begin(), by_time.end(), std::size_t{0});
  std::stable_sort(by_time.begin(), by_time.end(), [&](std::size_t a, std::size_t b) { return ds[a].time < ds[b].time; });
  std::vector<std::size_t> bin(n);
  for (std::size_t rank = 0; rank < n; ++rank) bin[by_time[rank]] = rank * time_bins / n;

  // Event strata first, then censored; bins ascending inside each.
  std::vector<std::vector<std::size_t>> strata(2 * time_bins);
  for (std::size_t i = 0; i < n; ++i) {
    strata[(ds[i].event ? 0 : time_bins) + bin[i]].push_back(i);
  }

  std::mt19937_64 gen(seed);
  FoldSplit split;
  split.folds.resize(k);
  std::size_t dealt = 0;
  for (auto& stratum : strata) {
    std::shuffle(stratum.begin(), stratum.end(), gen);
    for (const std::size_t i : stratum) split.folds[dealt++ % k].push_back(i);
  }
  for (auto& fold : split.folds) std::sort(fold.begin(), fold.end());
  return split;
}

}  // namespace survmae
