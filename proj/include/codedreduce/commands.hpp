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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "codedreduce/latency.hpp"
#include "codedreduce/ml.hpp"
#include "codedreduce/transport.hpp"

namespace codedreduce::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataSpec {
  std::string kind = "synthetic";  // synthetic | csv
  std::int64_t size = 300;         // d, ignored for csv (taken from the file)
  int features = 20;               // p
  double noise = 1.0;
  std::filesystem::path path;
  LossKind loss = LossKind::kLinear;
};

struct TransportSpec {
  std::chrono::milliseconds deadline{30000};
  std::vector<NodeId> crash;        // die right after receiving the model
  std::vector<NodeId> never_start;  // process is never spawned
  std::vector<std::pair<NodeId, std::chrono::milliseconds>> kill_after;
};

struct ExperimentConfig {
  std::vector<Scheme> schemes{Scheme::kCR, Scheme::kGC, Scheme::kUMW, Scheme::kSGD, Scheme::kRAR};
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";

  int n = 3;
  int layers = 2;
  int s = 1;
  int workers = 0;         // N; defaults to the tree's worker count
  int flat_stragglers = -1;  // S; defaults to s * N / n

  DataSpec data;
  LatencyConfig latency{0.001, 1.0, 0.001, 0.0, 0};
  std::size_t trials = 1000;

  int iterations = 50;
  StepSchedule step{0.0, false, 1.0, 1.0};  // eta 0 means 1 / smoothness constant
  double l2 = 0.0;

  std::size_t verify_cap = 100000;
  TransportSpec transport;

  /// Fills derived defaults (N, S) and throws ConfigError naming the first
  /// violated constraint.
  void validate();

  SchemeSpec spec_for(Scheme scheme) const;
};

/// INI-style file: [section] headers and key = value lines.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses "layer:index".
NodeId parse_node(const std::string& text);

// Each command writes its CSV outputs under cfg.out, prints a short report to
// `log` and returns a process exit code.
int cmd_validate(ExperimentConfig cfg, std::ostream& log);
int cmd_train(ExperimentConfig cfg, std::ostream& log);
int cmd_latency(ExperimentConfig cfg, std::ostream& log);
int cmd_verify(ExperimentConfig cfg, std::ostream& log);
int cmd_transport_demo(ExperimentConfig cfg, std::ostream& log);

}  // namespace codedreduce::cli
