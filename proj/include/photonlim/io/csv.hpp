/* Copyright 2026 The photonlim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "../errors.hpp"

namespace photonlim::io {

/// Shortest-form text of x with 12 significant digits, locale independent.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0; // no negative zero in files
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, r.ptr);
}

/// Column-major numeric table with a header row.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string &name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw SchemaError("missing CSV column '" + name + "'");
  }
  std::vector<double> values(const std::string &name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto &r : rows) out.push_back(r[c]);
    return out;
  }
  void add_row(std::vector<double> r) {
    if (r.size() != columns.size()) throw SchemaError("row width does not match the header");
    rows.push_back(std::move(r));
  }
};

inline std::string to_csv(const Table &t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) s += ',';
    s += t.columns[i];
  }
  s += '\n';
  for (const auto &r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      s += format_number(r[i]);
    }
    s += '\n';
  }
  return s;
}

inline void write_text(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path + "'");
}

inline void write_csv(const std::string &path, const Table &t) { write_text(path, to_csv(t)); }

inline Table parse_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  Table t;
  if (!std::getline(in, line) || line.empty()) throw SchemaError("CSV has no header");
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) t.columns.push_back(cell);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream r(line);
    std::string cell;
    while (std::getline(r, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        if (cell == "nan") v = std::nan("");
        else if (cell == "inf") v = INFINITY;
        else if (cell == "-inf") v = -INFINITY;
        else throw SchemaError("non-numeric CSV cell '" + cell + "' on line " + std::to_string(line_no));
      }
      row.push_back(v);
    }
    if (row.size() != t.columns.size())
      throw SchemaError("CSV line " + std::to_string(line_no) + " has the wrong number of cells");
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table read_csv(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

} // namespace photonlim::io
