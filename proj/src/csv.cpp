// Copyright 2026 The CodedReduce Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "codedreduce/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace codedreduce::csv {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - start);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    fields.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& field) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  // Underflow to a subnormal also reports ERANGE; only overflow is an error.
  if (field.empty() || end != field.c_str() + field.size() || (errno == ERANGE && std::isinf(v)))
    throw std::invalid_argument("not a number: '" + field + "'");
  return v;
}

long long parse_int(const std::string& field) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE)
    throw std::invalid_argument("not an integer: '" + field + "'");
  return v;
}

Table read_table(std::istream& is, bool has_header) {
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (first && has_header) {
      table.header = std::move(fields);
    } else {
      table.rows.push_back(std::move(fields));
    }
    first = false;
  }
  return table;
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os << "index,value\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << i << ',' << format_double(v[i]) << '\n';
}

Eigen::VectorXd read_vector(std::istream& is) {
  const auto table = read_table(is, true);
  if (table.header.size() != 2) throw std::runtime_error("vector csv needs header index,value");
  Eigen::VectorXd v(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != 2 || parse_int(row[0]) != static_cast<long long>(r))
      throw std::runtime_error("vector csv row " + std::to_string(r) + " malformed");
    v[static_cast<Eigen::Index>(r)] = parse_double(row[1]);
  }
  return v;
}

}  // namespace codedreduce::csv
