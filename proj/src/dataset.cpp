#include "survmae/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "csv.hpp"
#include "survmae/error.hpp"

namespace survmae {

namespace {

void validate_record(const SurvivalRecord& r, std::size_t index, std::size_t dim) {
  const std::string where = "record " + std::to_string(index);
  if (r.features.size() != dim) {
    throw DomainError(where + ": feature dimension " + std::to_string(r.features.size()) + " != " +
                      std::to_string(dim));
  }
  if (!std::isfinite(r.time) || r.time <= 0.0) throw DomainError(where + ": time must be positive");
  if (r.true_event_time) {
    const double e = *r.true_event_time;
    if (!std::isfinite(e) || e <= 0.0) throw DomainError(where + ": hidden event time must be positive");
    if (r.event && e != r.time) throw DomainError(where + ": uncensored record with hidden time != time");
    if (!r.event && e < r.time) throw DomainError(where + ": censored record with hidden time before censoring");
  }
}

}  // namespace

SurvivalDataset::SurvivalDataset(std::vector<SurvivalRecord> records, std::vector<std::string> feature_names)
    : records_(std::move(records)), feature_names_(std::move(feature_names)) {
  if (records_.empty()) throw DomainError("survival dataset must be nonempty");
  for (std::size_t i = 0; i < records_.size(); ++i) validate_record(records_[i], i, feature_names_.size());
}

std::vector<double> SurvivalDataset::times() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.time);
  return out;
}

std::vector<bool> SurvivalDataset::events() const {
  std::vector<bool> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.event);
  return out;
}

std::size_t SurvivalDataset::event_count() const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.event; }));
}

double SurvivalDataset::censor_rate() const {
  return static_cast<double>(size() - event_count()) / static_cast<double>(size());
}

bool SurvivalDataset::has_ground_truth() const {
  return std::all_of(records_.begin(), records_.end(), [](const auto& r) { return r.true_event_time.has_value(); });
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<SurvivalRecord> out;
  out.reserve(indices.size());
  for (const std::size_t i : indices) {
    if (i >= records_.size()) throw DomainError("subset index " + std::to_string(i) + " out of range");
    out.push_back(records_[i]);
  }
  return SurvivalDataset(std::move(out), feature_names_);
}

DatasetStats dataset_stats(const SurvivalDataset& ds) {
  std::vector<double> event_times;
  for (const auto& r : ds.records()) {
    if (r.event) event_times.push_back(r.time);
  }
  if (event_times.size() < 2) {
    throw InsufficientEventsError("dataset statistics need at least two uncensored records");
  }
  std::sort(event_times.begin(), event_times.end());
  const std::size_t m = event_times.size();

  DatasetStats stats;
  stats.n = ds.size();
  stats.censor_rate = ds.censor_rate();
  stats.t_max_event = event_times.back();
  stats.t_median_event =
      m % 2 == 1 ? event_times[m / 2] : 0.5 * (event_times[m / 2 - 1] + event_times[m / 2]);
  const double mean = std::accumulate(event_times.begin(), event_times.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (const double t : event_times) ss += (t - mean) * (t - mean);
  stats.sigma_event = std::sqrt(ss / static_cast<double>(m - 1));
  return stats;
}

SurvivalDataset parse_dataset(std::istream& in, const std::string& time_column, const std::string& event_column) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset CSV is empty (header row required)");
  const auto header_cells = detail::split_row(line);
  std::vector<std::string> header(header_cells.begin(), header_cells.end());

  const auto find = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const std::ptrdiff_t time_idx = find(time_column);
  const std::ptrdiff_t event_idx = find(event_column);
  const std::ptrdiff_t truth_idx = find(kTrueTimeColumn);
  if (time_idx < 0) throw ParseError("missing time column '" + time_column + "'");
  if (event_idx < 0) throw ParseError("missing event column '" + event_column + "'");

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto sc = static_cast<std::ptrdiff_t>(c);
    if (sc == time_idx || sc == event_idx || sc == truth_idx) continue;
    feature_cols.push_back(c);
    feature_names.push_back(header[c]);
  }

  std::vector<SurvivalRecord> records;
  std::size_t row = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_row(line);
    const std::string where = "row " + std::to_string(row);
    if (cells.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    const auto number = [&](std::size_t c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(where + ": non-numeric value '" + std::string(cells[c]) + "' in column '" + header[c] + "'");
      }
      return *v;
    };

    SurvivalRecord rec;
    rec.time = number(static_cast<std::size_t>(time_idx));
    if (rec.time <= 0.0) throw ParseError(where + ": time must be positive");
    const double ev = number(static_cast<std::size_t>(event_idx));
    if (ev != 0.0 && ev != 1.0) throw ParseError(where + ": event must be 0 or 1");
    rec.event = ev == 1.0;
    if (truth_idx >= 0 && !cells[static_cast<std::size_t>(truth_idx)].empty()) {
      rec.true_event_time = number(static_cast<std::size_t>(truth_idx));
    }
    rec.features.reserve(feature_cols.size());
    for (const std::size_t c : feature_cols) rec.features.push_back(number(c));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw ParseError("dataset CSV has no data rows");
  try {
    return SurvivalDataset(std::move(records), std::move(feature_names));
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

SurvivalDataset load_dataset(const std::filesystem::path& path, const std::string& time_column,
                             const std::string& event_column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file " + path.string());
  return parse_dataset(in, time_column, event_column);
}

void write_dataset(std::ostream& out, const SurvivalDataset& ds) {
  const bool with_truth = std::any_of(ds.records().begin(), ds.records().end(),
                                      [](const auto& r) { return r.true_event_time.has_value(); });
  out << "time,event";
  if (with_truth) out << ',' << kTrueTimeColumn;
  for (const auto& name : ds.feature_names()) out << ',' << name;
  out << '\n';
  for (const auto& r : ds.records()) {
    out << detail::format_double(r.time) << ',' << (r.event ? 1 : 0);
    if (with_truth) {
      out << ',';
      if (r.true_event_time) out << detail::format_double(*r.true_event_time);
    }
    for (const double f : r.features) out << ',' << detail::format_double(f);
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const SurvivalDataset& ds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset file " + path.string());
  write_dataset(out, ds);
}

}  // namespace survmae
