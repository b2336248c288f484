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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace codedreduce {

/// Address of a node in a regular tree. Layer 0 holds only the master (0,1);
/// layer l holds indices 1..n^l.
struct NodeId {
  int layer = 0;
  std::int64_t index = 1;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

std::ostream& operator<<(std::ostream& os, NodeId node);
std::string to_string(NodeId node);

inline constexpr NodeId kMaster{0, 1};

/// (n,L)-regular tree: a master plus L layers where every non-leaf node has
/// exactly n children. Nodes are stored densely; the offset of (l,i) is
/// (1 + n + ... + n^(l-1)) + (i - 1), so the master sits at offset 0.
class RegularTree {
 public:
  RegularTree(int fanout, int layers);

  int fanout() const { return fanout_; }
  int layers() const { return layers_; }

  /// Number of workers N = n + ... + n^L (the master is not a worker).
  std::int64_t worker_count() const { return static_cast<std::int64_t>(node_count()) - 1; }
  /// Workers plus the master.
  std::size_t node_count() const { return layer_offset_.back(); }
  std::int64_t layer_size(int layer) const;

  bool contains(NodeId node) const;
  std::size_t offset(NodeId node) const;
  NodeId node_at(std::size_t offset) const;

  bool is_leaf(NodeId node) const { return node.layer == layers_; }
  NodeId parent(NodeId node) const;
  /// The k-th child (0-based slot) of a non-leaf node.
  NodeId child(NodeId node, int slot) const;
  std::vector<NodeId> children(NodeId node) const;
  /// Position of a worker among its siblings, 0-based.
  int slot_of(NodeId node) const;

  /// Every non-leaf node (master included) in offset order.
  std::vector<NodeId> parents() const;
  std::size_t parent_count() const { return layer_offset_[layers_]; }

 private:
  int fanout_;
  int layers_;
  // layer_offset_[l] is the dense offset of (l,1); the extra entry is the total.
  std::vector<std::size_t> layer_offset_;
};

RegularTree build_tree(int fanout, int layers);

/// Which children of each parent straggle. Slots are 0-based positions among
/// the parent's n children and are kept sorted.
class StragglerPattern {
 public:
  StragglerPattern() = default;
  explicit StragglerPattern(const RegularTree& tree);

  /// Builds from an explicit map of parent -> straggling children.
  static StragglerPattern from_children(const RegularTree& tree,
                                        const std::map<NodeId, std::vector<NodeId>>& stragglers);

  void set(std::size_t parent_offset, std::vector<int> slots);
  std::span<const int> slots(std::size_t parent_offset) const { return slots_[parent_offset]; }
  std::size_t parent_count() const { return slots_.size(); }

  /// Largest number of stragglers listed under any single parent.
  int max_per_parent() const;
  std::size_t total() const;
  bool is_straggler(std::size_t parent_offset, int slot) const;

  friend bool operator==(const StragglerPattern&, const StragglerPattern&) = default;

 private:
  std::vector<std::vector<int>> slots_;
};

/// All per-parent straggler choices of size <= s when there are at most
/// `cap` of them, otherwise `cap` seeded uniform draws that always include
/// the empty pattern and the all-maximal pattern (first s slots everywhere).
std::vector<StragglerPattern> enumerate_patterns(const RegularTree& tree, int s, std::size_t cap,
                                                 std::uint64_t seed = 0);

/// Number of admissible patterns, saturating at the largest size_t.
std::size_t pattern_count(const RegularTree& tree, int s);

}  // namespace codedreduce
