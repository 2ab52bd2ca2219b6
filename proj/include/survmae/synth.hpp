#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "survmae/dataset.hpp"
#include "survmae/estimators.hpp"

namespace survmae {

enum class CensoringKind { uniform, uniform_admin, exponential, original_independent, original_dependent, external };

/// Accepts the CLI spellings (uniform, uniform-admin, exponential, orig-indep, orig-dep,
/// external) as well as the enum names.
CensoringKind parse_censoring_kind(std::string_view name);
std::string_view to_string(CensoringKind kind);

struct CensoringSpec {
  CensoringKind kind = CensoringKind::uniform;
  /// Reference data for the external kind, given either as a CSV path or in memory.
  std::filesystem::path external_path;
  std::shared_ptr<const SurvivalDataset> external_data;
  /// Multiplies the exponential mean; 1 gives mean sigma_t.
  double exp_scale = 1.0;

  /// Throws ConfigError when the kind's parameters are missing or invalid.
  void validate() const;
};

/// Censoring models fitted on bit-flipped data. Only the parts the kind needs are set.
struct CensoringModels {
  std::optional<KaplanMeierFit> km;
  std::optional<CoxModel> cox;
  std::optional<KaplanMeierFit> external_km;
  /// Largest uncensored time of the external reference.
  double external_t_max = 0.0;
};

SurvivalDataset flip_censor_bits(const SurvivalDataset& ds);

/// Uncensored records only, hidden truth set to the observed time.
SurvivalDataset keep_uncensored(const SurvivalDataset& ds);

/// Fits what `spec` needs from the raw data (and the external reference, when used).
CensoringModels fit_censoring_models(const SurvivalDataset& ds_raw, const CensoringSpec& spec);

/// Inverse-transform draw from a survival step curve: the earliest knot whose value is
/// <= u. Draws past the curve's support land on its last knot.
double inverse_transform(const StepCurve& curve, double u);

/// One censoring time per record of d_prime, each a pure function of (seed, index).
std::vector<double> sample_censor_times(const CensoringSpec& spec, const SurvivalDataset& d_prime,
                                        const DatasetStats& stats, const CensoringModels& aux, std::uint64_t seed);

/// Censors record i at c_i when c_i < t_i; hidden truth is kept either way.
SurvivalDataset apply_censoring(const SurvivalDataset& d_prime, const std::vector<double>& censor_times);

struct SemiSyntheticResult {
  SurvivalDataset data;
  DatasetStats source_stats;  ///< statistics of the uncensored subset
  double censor_rate = 0.0;
};

SemiSyntheticResult make_semi_synthetic_detailed(const SurvivalDataset& ds_raw, const CensoringSpec& spec,
                                                 std::uint64_t seed);
SurvivalDataset make_semi_synthetic(const SurvivalDataset& ds_raw, const CensoringSpec& spec, std::uint64_t seed);

}  // namespace survmae
