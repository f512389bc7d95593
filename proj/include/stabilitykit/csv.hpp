#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stabilitykit/error.hpp"

namespace stabilitykit::csv {

// Minimal comma-separated reader: no quoting, fields trimmed, blank lines and
// '#' comments skipped.
inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.emplace_back(trim(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline double require_double(std::string_view s, std::size_t line_no) {
  const auto v = to_double(s);
  if (!v) throw ParseError("line " + std::to_string(line_no) + ": '" + std::string(s) +
                           "' is not a number");
  return *v;
}

struct Row {
  std::size_t line_no = 0;
  std::vector<std::string> fields;
};

inline std::vector<Row> read_rows(std::istream& in) {
  std::vector<Row> rows;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    rows.push_back({no, split(t)});
  }
  return rows;
}

inline std::vector<Row> read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_rows(in);
}

// Drops the first row if its field at `numeric_col` is not a number.
inline void drop_header(std::vector<Row>& rows, std::size_t numeric_col) {
  if (!rows.empty() && (rows[0].fields.size() <= numeric_col ||
                        !to_double(rows[0].fields[numeric_col])))
    rows.erase(rows.begin());
}

}  // namespace stabilitykit::csv
