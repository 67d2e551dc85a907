// table.hpp - rectangular result tables with CSV (RFC 4180) and JSON output.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace bloodsim {

enum class TableFormat { csv, json };

using TableCell = std::variant<std::monostate, double, std::int64_t, std::string>;

/// Numbers are written with 9 significant digits in both formats, so a CSV
/// and a JSON emission of the same table parse to identical values.
struct OutputTable {
  std::vector<std::string> header;
  std::vector<std::vector<TableCell>> rows;

  void add_row(std::vector<TableCell> row) {
    if (row.size() != header.size()) throw std::logic_error("table row width does not match header");
    rows.push_back(std::move(row));
  }
};

inline std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

inline std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (const char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

inline std::string cell_text(const TableCell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, cell);
}

inline void write_csv(const OutputTable& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << csv_field(table.header[i]);
  }
  out << "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(cell_text(row[i]));
    out << "\r\n";
  }
}

inline nlohmann::json cell_json(const TableCell& cell) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double v) const {
      if (!std::isfinite(v)) return format_number(v);
      return std::stod(format_number(v));
    }
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, cell);
}

/// JSON array with one object per row, keys in header order.
inline nlohmann::ordered_json table_to_json(const OutputTable& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json object = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) object[table.header[i]] = cell_json(row[i]);
    rows.push_back(std::move(object));
  }
  return rows;
}

inline void write_table(const OutputTable& table, TableFormat format, std::ostream& out) {
  if (format == TableFormat::csv) {
    write_csv(table, out);
  } else {
    out << table_to_json(table).dump(2) << "\n";
  }
}

}  // namespace bloodsim
