#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "survmae/dataset.hpp"

namespace survmae {

struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;

  /// Every index not in fold `k`, ascending.
  std::vector<std::size_t> complement(std::size_t k) const;
};

inline constexpr std::size_t kDefaultTimeBins = 4;

/// Stratifies on (event flag, time quantile bin), shuffles each stratum with a seeded
/// generator, then deals the concatenated strata round-robin across k folds.
FoldSplit stratified_kfold(const SurvivalDataset& ds, std::size_t k, std::uint64_t seed,
                           std::size_t time_bins = kDefaultTimeBins);

}  // namespace survmae
