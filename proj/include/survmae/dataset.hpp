#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace survmae {

struct SurvivalRecord {
  std::vector<double> features;
  double time = 0.0;
  bool event = false;
  /// Hidden event time, only known for semi-synthetic data.
  std::optional<double> true_event_time;
};

/// Nonempty collection of records with a shared feature layout.
class SurvivalDataset {
 public:
  SurvivalDataset(std::vector<SurvivalRecord> records, std::vector<std::string> feature_names);

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dimension() const noexcept { return feature_names_.size(); }
  const SurvivalRecord& operator[](std::size_t i) const { return records_[i]; }
  std::span<const SurvivalRecord> records() const noexcept { return records_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  std::vector<double> times() const;
  std::vector<bool> events() const;
  std::size_t event_count() const;
  double censor_rate() const;
  /// True when every record carries a hidden event time.
  bool has_ground_truth() const;

  SurvivalDataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<SurvivalRecord> records_;
  std::vector<std::string> feature_names_;
};

struct DatasetStats {
  std::size_t n = 0;
  double censor_rate = 0.0;
  double t_max_event = 0.0;
  double t_median_event = 0.0;
  /// Sample standard deviation (divisor n-1) of the uncensored times.
  double sigma_event = 0.0;
};

/// Statistics over uncensored records (n and censor_rate over all).
/// Throws InsufficientEventsError with fewer than two uncensored records.
DatasetStats dataset_stats(const SurvivalDataset& ds);

inline constexpr const char* kTrueTimeColumn = "true_time";

/// Reads a CSV with a header row. The time and event columns are required, an optional
/// `true_time` column carries hidden truth, every other column is a numeric feature.
SurvivalDataset load_dataset(const std::filesystem::path& path, const std::string& time_column = "time",
                             const std::string& event_column = "event");
SurvivalDataset parse_dataset(std::istream& in, const std::string& time_column = "time",
                              const std::string& event_column = "event");

/// Writes `time,event[,true_time],<features>`; true_time is emitted iff any record has it.
void write_dataset(std::ostream& out, const SurvivalDataset& ds);
void save_dataset(const std::filesystem::path& path, const SurvivalDataset& ds);

}  // namespace survmae
