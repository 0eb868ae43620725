#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace qtraj {

/// Empty, real, integer or text cell.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct RunMetadata {
  std::string task;
  std::string study;
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_time = 0.0;
  std::string version;
};

class ResultTable {
 public:
  explicit ResultTable(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  /// Throws unless the row has one cell per column.
  void add_row(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Header row, 17 significant digits, LF line endings.
std::string to_csv(const ResultTable& table);
/// {"metadata": {...}, "columns": [...], "rows": [[...], ...]}; non-finite
/// reals are written as the strings "inf", "-inf" and "nan".
std::string to_json(const ResultTable& table, const RunMetadata& meta);

/// 64-bit FNV-1a of `text` as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qtraj
