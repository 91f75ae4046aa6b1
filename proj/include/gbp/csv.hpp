#pragma once

// Minimal CSV ingestion: UTF-8, header row, '.' decimal separator, all-numeric
// body. Lines starting with '#' are skipped (data provenance comments).

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gbp/errors.hpp"
#include "gbp/math/linalg.hpp"

namespace gbp {

struct CsvTable {
  std::vector<std::string> names;
  std::vector<Vec> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  bool has(const std::string& name) const {
    for (const std::string& n : names)
      if (n == name) return true;
    return false;
  }
  const Vec& column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return columns[i];
    throw io_error("csv: missing required column '" + name + "'");
  }
};

namespace detail {
inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}
}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields = detail::split_fields(t);
    if (!have_header) {
      table.names = fields;
      table.columns.assign(fields.size(), {});
      have_header = true;
      continue;
    }
    if (fields.size() != table.names.size())
      throw io_error(path + ":" + std::to_string(lineno) + ": expected " +
                     std::to_string(table.names.size()) + " fields, got " +
                     std::to_string(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const char* begin = fields[i].c_str();
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin || *end != '\0')
        throw io_error(path + ":" + std::to_string(lineno) + ": field '" +
                       fields[i] + "' is not a number");
      table.columns[i].push_back(v);
    }
  }
  if (!have_header) throw io_error(path + ": empty file (no header row)");
  return table;
}

}  // namespace gbp
