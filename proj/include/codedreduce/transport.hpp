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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codedreduce/allocation.hpp"
#include "codedreduce/engine.hpp"

// One CR aggregation round executed by real local processes talking over TCP
// on the loopback interface, one process per tree node.
namespace codedreduce::transport {

struct Endpoint {
  NodeId node;
  std::string host;
  std::uint16_t port = 0;
};

/// Plain text, one "layer index host port" line per listening node; lines
/// starting with '#' are comments.
void write_endpoints(std::ostream& os, std::span<const Endpoint> endpoints);
std::vector<Endpoint> read_endpoints(std::istream& is);

enum class Role { kMaster, kInternal, kLeaf };
Role role_of(const RegularTree& tree, NodeId node);

struct NodeContext {
  const Assignment* assignment = nullptr;
  NodeId node = kMaster;
  std::vector<Endpoint> endpoints;
  GradientOracle oracle;
  ModelVec theta;  // used by the master only; everyone else receives it
  std::chrono::milliseconds deadline{30000};
  int listen_fd = -1;  // pre-bound listening socket; bound from endpoints when -1
  bool crash_before_compute = false;  // die with SIGKILL right after the model arrives
  std::filesystem::path output;       // master's gradient CSV
};

struct NodeReport {
  NodeId node = kMaster;
  bool ok = false;
  std::string error;
  std::optional<NodeId> aborted_parent;  // set when this parent could not collect n - s messages
  std::vector<int> consumed;             // child slots whose messages were decoded
};

/// Leaf: receive the model, compute, send. Parent: forward the model, collect
/// the first n - s gradient messages (later ones are discarded), decode with
/// the realized survivor set, add the local coded gradient, send upward (or,
/// at the master, write the result). A parent that cannot reach n - s
/// messages before the deadline, or loses more than s children, aborts.
NodeReport run_node(const NodeContext& ctx);

void write_node_report(std::ostream& os, const NodeReport& report);
NodeReport read_node_report(std::istream& is, NodeId node);

enum class Failure { kNone, kNeverStart, kCrashBeforeCompute, kKillAfter };

struct FailureAction {
  Failure kind = Failure::kNone;
  std::chrono::milliseconds after{0};  // for kKillAfter
};

using FailurePlan = std::map<NodeId, FailureAction>;

struct TransportOptions {
  std::chrono::milliseconds deadline{30000};
  /// How long to wait for the remaining processes after the master exits.
  std::chrono::milliseconds grace{2000};
  std::filesystem::path run_dir;
};

struct RunReport {
  bool recovered = false;
  GradientVec gradient;
  std::optional<NodeId> aborted_parent;  // first parent, top-down, that reported an abort
  std::vector<NodeReport> nodes;         // tree offset order, master first
  std::filesystem::path master_output;
  std::chrono::milliseconds elapsed{0};

  /// Survivor pattern implied by the parents' consumed sets; parents that
  /// never reported count every child as missing.
  StragglerPattern realized_pattern(const RegularTree& tree) const;
};

/// Binds one loopback listener per parent, writes the endpoints file into
/// run_dir, forks one process per node (skipping kNeverStart), applies the
/// failure plan, waits for the master and collects every node's report.
RunReport orchestrate(const Assignment& assignment, const GradientOracle& oracle,
                      const ModelVec& theta, const FailurePlan& plan,
                      const TransportOptions& options);

}  // namespace codedreduce::transport
