// csv.hpp -- shared helpers for the JSON-headed CSV files.

#ifndef SOBOLEV_SRC_CSV_HPP
#define SOBOLEV_SRC_CSV_HPP

#include "sobolev/core.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace sobolev::csv {

inline constexpr int kFormatVersion = 1;

/// Round-trip representation of a double; NaN is written as "nan".
inline std::string number(double x) {
  if (std::isnan(x))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_number(const std::string &cell) {
  if (cell == "nan" || cell == "NaN")
    return std::nan("");
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception &) {
    throw usage_error("bad numeric cell \"" + cell + "\"");
  }
  if (used != cell.size())
    throw usage_error("bad numeric cell \"" + cell + "\"");
  return v;
}

inline std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

/// Reads the leading JSON header line.
inline nlohmann::json read_header(std::istream &in, const std::string &format) {
  std::string line;
  if (!std::getline(in, line))
    throw usage_error("missing header line in " + format + " file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error &) {
    throw usage_error("header line of " + format + " file is not JSON");
  }
  if (header.value("format", std::string()) != format)
    throw usage_error("expected format \"" + format + "\"");
  if (header.value("version", 0) != kFormatVersion)
    throw usage_error("unsupported " + format + " version");
  return header;
}

} // namespace sobolev::csv

#endif // SOBOLEV_SRC_CSV_HPP
