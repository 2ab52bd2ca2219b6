#include "survmae/curve_io.hpp"

#include <fstream>
#include <numeric>
#include <string>

#include "csv.hpp"
#include "survmae/error.hpp"

namespace survmae {

std::vector<StepCurve> CurveTable::select(std::span<const std::size_t> indices) const {
  std::vector<StepCurve> out;
  out.reserve(indices.size());
  for (const std::size_t i : indices) {
    const auto it = curves.find(i);
    if (it == curves.end()) throw DomainError("curve file has no row for subject " + std::to_string(i));
    out.push_back(it->second);
  }
  return out;
}

std::vector<StepCurve> CurveTable::first(std::size_t n) const {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return select(idx);
}

CurveTable parse_curves(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("curve file is empty");
  const auto header = detail::split_row(line);
  if (header.empty() || header[0] != "t") throw ParseError("curve file header must start with 't'");
  CurveTable table;
  for (std::size_t j = 1; j < header.size(); ++j) {
    const auto v = detail::parse_double(header[j]);
    if (!v) throw ParseError("curve file header: grid time " + std::to_string(j) + " is not a number");
    if (!table.grid.empty() && !(*v > table.grid.back())) {
      throw ParseError("curve file header: grid times must be strictly increasing");
    }
    if (*v < 0.0) throw ParseError("curve file header: grid times must be nonnegative");
    table.grid.push_back(*v);
  }
  if (table.grid.empty()) throw ParseError("curve file header has no grid times");

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_row(line);
    if (cells.size() != table.grid.size() + 1) {
      throw ParseError("curve file row " + std::to_string(row) + ": expected " +
                       std::to_string(table.grid.size() + 1) + " cells, got " + std::to_string(cells.size()));
    }
    const auto idx = detail::parse_double(cells[0]);
    if (!idx || *idx < 0.0 || *idx != static_cast<double>(static_cast<std::size_t>(*idx))) {
      throw ParseError("curve file row " + std::to_string(row) + ": subject index must be a nonnegative integer");
    }
    std::vector<double> values;
    values.reserve(table.grid.size());
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const auto v = detail::parse_double(cells[j]);
      if (!v) throw ParseError("curve file row " + std::to_string(row) + ": non-numeric survival value");
      values.push_back(*v);
    }
    const auto key = static_cast<std::size_t>(*idx);
    try {
      auto curve = StepCurve(table.grid, std::move(values));
      if (!table.curves.emplace(key, std::move(curve)).second) {
        throw ParseError("curve file row " + std::to_string(row) + ": duplicate subject index");
      }
    } catch (const DomainError& e) {
      throw ParseError("curve file row " + std::to_string(row) + ": " + e.what());
    }
  }
  return table;
}

CurveTable load_curves(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open curve file " + path.string());
  return parse_curves(in);
}

void write_curves(std::ostream& out, std::span<const double> grid, std::span<const StepCurve> curves) {
  out << 't';
  for (const double t : grid) out << ',' << detail::format_double(t);
  out << '\n';
  for (std::size_t i = 0; i < curves.size(); ++i) {
    out << i;
    for (const double t : grid) out << ',' << detail::format_double(curves[i](t));
    out << '\n';
  }
}

void save_curves(const std::filesystem::path& path, std::span<const double> grid, std::span<const StepCurve> curves) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write curve file " + path.string());
  write_curves(out, grid, curves);
}

}  // namespace survmae
