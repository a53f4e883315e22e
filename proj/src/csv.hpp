#pragma once

// Minimal CSV helpers shared by the artifact writers and readers.

#include <fmt/format.h>

#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uuv::csv {

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline double to_double(const std::string& field, std::size_t line_no) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) {
    throw std::runtime_error(fmt::format("csv line {}: '{}' is not a number", line_no, field));
  }
  return value;
}

/// Reads all non-empty data rows after checking the header matches.
inline std::vector<std::vector<double>> read_numeric(std::istream& is,
                                                     std::string_view expected_header) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw std::runtime_error(
        fmt::format("csv: header '{}' does not match expected '{}'", line, expected_header));
  }
  const std::size_t columns = split(expected_header).size();
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != columns) {
      throw std::runtime_error(fmt::format("csv line {}: expected {} fields, got {}", line_no,
                                           columns, fields.size()));
    }
    std::vector<double> row;
    row.reserve(columns);
    for (const auto& f : fields) row.push_back(to_double(f, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace uuv::csv
