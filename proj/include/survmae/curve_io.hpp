#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "survmae/step_curve.hpp"

namespace survmae {

/// Survival curves on a shared time grid, keyed by subject index.
///
/// On disk: a header `t,<grid times ascending>` then one row `<index>,<values>` per subject.
struct CurveTable {
  std::vector<double> grid;
  std::map<std::size_t, StepCurve> curves;

  /// Curves for the given subjects in order. Throws DomainError naming the first
  /// subject without a row.
  std::vector<StepCurve> select(std::span<const std::size_t> indices) const;
  /// Curves for subjects 0..n-1.
  std::vector<StepCurve> first(std::size_t n) const;
};

CurveTable parse_curves(std::istream& in);
CurveTable load_curves(const std::filesystem::path& path);

/// Samples each curve on `grid` and writes rows indexed 0..n-1.
void write_curves(std::ostream& out, std::span<const double> grid, std::span<const StepCurve> curves);
void save_curves(const std::filesystem::path& path, std::span<const double> grid, std::span<const StepCurve> curves);

}  // namespace survmae
