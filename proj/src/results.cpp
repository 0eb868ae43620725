#include "qtraj/results.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "qtraj/error.hpp"

namespace qtraj {
namespace {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ResultTable::ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw Error("cli", "ResultTable", "a table needs at least one column");
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw Error("cli", "ResultTable", "row has " + std::to_string(row.size()) + " cells, expected " +
                                          std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

std::size_t ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw Error("cli", "ResultTable", "no column named '" + name + "'");
}

std::string to_csv(const ResultTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns().size(); ++i) {
    out += (i ? "," : "") + csv_escape(table.columns()[i]);
  }
  out += '\n';
  for (const auto& row : table.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out += format_real(v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out += std::to_string(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
              out += csv_escape(v);
            }
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const ResultTable& table, const RunMetadata& meta) {
  nlohmann::ordered_json doc;
  doc["metadata"] = {{"task", meta.task},
                     {"study", meta.study},
                     {"seed", meta.seed},
                     {"config_hash", meta.config_hash},
                     {"wall_time_s", meta.wall_time},
                     {"version", meta.version}};
  doc["columns"] = table.columns();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows()) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& cell : row) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              r.push_back(nullptr);
            } else if constexpr (std::is_same_v<T, double>) {
              if (std::isfinite(v)) {
                r.push_back(v);
              } else {
                r.push_back(format_real(v));
              }
            } else {
              r.push_back(v);
            }
          },
          cell);
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qtraj
