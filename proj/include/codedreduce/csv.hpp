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

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

// Minimal CSV helpers shared by every file format in the project. Numbers are
// written with 17 significant digits so a write/read cycle is lossless.
namespace codedreduce::csv {

std::string format_double(double value);
std::vector<std::string> split_line(std::string_view line);
double parse_double(const std::string& field);
long long parse_int(const std::string& field);

/// Reads all non-empty lines; a header line is returned separately when
/// `has_header` is set.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
Table read_table(std::istream& is, bool has_header);

void write_vector(std::ostream& os, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector(std::istream& is);

}  // namespace codedreduce::csv
