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

#include "codedreduce/topology.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace codedreduce {

std::ostream& operator<<(std::ostream& os, NodeId node) {
  return os << '(' << node.layer << ',' << node.index << ')';
}

std::string to_string(NodeId node) {
  std::ostringstream os;
  os << node;
  return os.str();
}

RegularTree::RegularTree(int fanout, int layers) : fanout_(fanout), layers_(layers) {
  if (fanout < 1) throw std::invalid_argument("regular tree needs fanout >= 1");
  if (layers < 1) throw std::invalid_argument("regular tree needs at least one layer");
  layer_offset_.reserve(static_cast<std::size_t>(layers) + 2);
  std::size_t offset = 0;
  std::size_t width = 1;
  constexpr std::size_t kLimit = std::size_t{1} << 40;
  for (int l = 0; l <= layers; ++l) {
    layer_offset_.push_back(offset);
    offset += width;
    if (l < layers) {
      if (width > kLimit / static_cast<std::size_t>(fanout))
        throw std::invalid_argument("regular tree too large");
      width *= static_cast<std::size_t>(fanout);
    }
  }
  layer_offset_.push_back(offset);
}

std::int64_t RegularTree::layer_size(int layer) const {
  if (layer < 0 || layer > layers_) throw std::out_of_range("layer outside tree");
  return static_cast<std::int64_t>(layer_offset_[layer + 1] - layer_offset_[layer]);
}

bool RegularTree::contains(NodeId node) const {
  return node.layer >= 0 && node.layer <= layers_ && node.index >= 1 &&
         node.index <= layer_size(node.layer);
}

std::size_t RegularTree::offset(NodeId node) const {
  if (!contains(node)) throw std::out_of_range("node " + to_string(node) + " not in tree");
  return layer_offset_[node.layer] + static_cast<std::size_t>(node.index - 1);
}

NodeId RegularTree::node_at(std::size_t offset) const {
  if (offset >= node_count()) throw std::out_of_range("offset outside tree");
  auto it = std::upper_bound(layer_offset_.begin(), layer_offset_.end() - 1, offset);
  const int layer = static_cast<int>(it - layer_offset_.begin()) - 1;
  return {layer, static_cast<std::int64_t>(offset - layer_offset_[layer]) + 1};
}

NodeId RegularTree::parent(NodeId node) const {
  if (!contains(node) || node.layer == 0) throw std::invalid_argument("master has no parent");
  return {node.layer - 1, (node.index - 1) / fanout_ + 1};
}

NodeId RegularTree::child(NodeId node, int slot) const {
  if (!contains(node) || is_leaf(node)) throw std::invalid_argument("leaf has no children");
  if (slot < 0 || slot >= fanout_) throw std::out_of_range("child slot outside fanout");
  return {node.layer + 1, static_cast<std::int64_t>(fanout_) * (node.index - 1) + slot + 1};
}

std::vector<NodeId> RegularTree::children(NodeId node) const {
  std::vector<NodeId> out;
  if (is_leaf(node)) return out;
  out.reserve(static_cast<std::size_t>(fanout_));
  for (int k = 0; k < fanout_; ++k) out.push_back(child(node, k));
  return out;
}

int RegularTree::slot_of(NodeId node) const {
  if (!contains(node) || node.layer == 0) throw std::invalid_argument("master has no slot");
  return static_cast<int>((node.index - 1) % fanout_);
}

std::vector<NodeId> RegularTree::parents() const {
  std::vector<NodeId> out;
  out.reserve(parent_count());
  for (std::size_t off = 0; off < parent_count(); ++off) out.push_back(node_at(off));
  return out;
}

RegularTree build_tree(int fanout, int layers) { return RegularTree(fanout, layers); }

StragglerPattern::StragglerPattern(const RegularTree& tree) : slots_(tree.parent_count()) {}

StragglerPattern StragglerPattern::from_children(
    const RegularTree& tree, const std::map<NodeId, std::vector<NodeId>>& stragglers) {
  StragglerPattern pattern(tree);
  for (const auto& [parent, kids] : stragglers) {
    if (!tree.contains(parent) || tree.is_leaf(parent))
      throw std::invalid_argument(to_string(parent) + " is not a parent in the tree");
    std::vector<int> slots;
    for (NodeId kid : kids) {
      if (!tree.contains(kid) || kid.layer == 0 || tree.parent(kid) != parent)
        throw std::invalid_argument(to_string(kid) + " is not a child of " + to_string(parent));
      slots.push_back(tree.slot_of(kid));
    }
    pattern.set(tree.offset(parent), std::move(slots));
  }
  return pattern;
}

void StragglerPattern::set(std::size_t parent_offset, std::vector<int> slots) {
  if (parent_offset >= slots_.size()) throw std::out_of_range("parent offset outside pattern");
  std::sort(slots.begin(), slots.end());
  slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
  slots_[parent_offset] = std::move(slots);
}

int StragglerPattern::max_per_parent() const {
  std::size_t worst = 0;
  for (const auto& s : slots_) worst = std::max(worst, s.size());
  return static_cast<int>(worst);
}

std::size_t StragglerPattern::total() const {
  std::size_t sum = 0;
  for (const auto& s : slots_) sum += s.size();
  return sum;
}

bool StragglerPattern::is_straggler(std::size_t parent_offset, int slot) const {
  const auto& s = slots_.at(parent_offset);
  return std::binary_search(s.begin(), s.end(), slot);
}

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

// All subsets of {0..n-1} with at most s elements, by size then lexicographic.
std::vector<std::vector<int>> small_subsets(int n, int s) {
  std::vector<std::vector<int>> out;
  for (int k = 0; k <= s; ++k) {
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    std::fill(mask.begin(), mask.begin() + k, true);
    do {
      std::vector<int> subset;
      for (int j = 0; j < n; ++j)
        if (mask[j]) subset.push_back(j);
      out.push_back(std::move(subset));
    } while (std::prev_permutation(mask.begin(), mask.end()));
  }
  return out;
}

}  // namespace

std::size_t pattern_count(const RegularTree& tree, int s) {
  std::size_t choices = 0;
  for (int k = 0; k <= s; ++k) {
    const double c = binomial(tree.fanout(), k);
    if (c >= static_cast<double>(kSaturated)) return kSaturated;
    choices += static_cast<std::size_t>(c);
  }
  std::size_t total = 1;
  for (std::size_t p = 0; p < tree.parent_count(); ++p) total = saturating_mul(total, choices);
  return total;
}

std::vector<StragglerPattern> enumerate_patterns(const RegularTree& tree, int s, std::size_t cap,
                                                 std::uint64_t seed) {
  const int n = tree.fanout();
  if (s < 0 || s >= n) throw std::invalid_argument("straggler count must satisfy 0 <= s < n");
  const std::size_t parents = tree.parent_count();
  const std::size_t total = pattern_count(tree, s);

  std::vector<StragglerPattern> out;
  if (total <= cap) {
    const auto subsets = small_subsets(n, s);
    std::vector<std::size_t> digit(parents, 0);
    out.reserve(total);
    for (std::size_t count = 0; count < total; ++count) {
      StragglerPattern pattern(tree);
      for (std::size_t p = 0; p < parents; ++p) pattern.set(p, subsets[digit[p]]);
      out.push_back(std::move(pattern));
      for (std::size_t p = 0; p < parents; ++p) {
        if (++digit[p] < subsets.size()) break;
        digit[p] = 0;
      }
    }
    return out;
  }

  if (cap == 0) return out;
  out.reserve(cap);
  out.emplace_back(tree);
  if (cap == 1) return out;

  std::vector<int> first_slots(static_cast<std::size_t>(s));
  std::iota(first_slots.begin(), first_slots.end(), 0);
  StragglerPattern maximal(tree);
  for (std::size_t p = 0; p < parents; ++p) maximal.set(p, first_slots);
  out.push_back(std::move(maximal));

  std::mt19937_64 rng(seed);
  std::vector<double> size_weights;
  for (int k = 0; k <= s; ++k) size_weights.push_back(binomial(n, k));
  std::discrete_distribution<int> pick_size(size_weights.begin(), size_weights.end());
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);

  while (out.size() < cap) {
    StragglerPattern pattern(tree);
    for (std::size_t p = 0; p < parents; ++p) {
      const int k = pick_size(rng);
      std::vector<int> chosen;
      std::sample(all.begin(), all.end(), std::back_inserter(chosen), k, rng);
      pattern.set(p, std::move(chosen));
    }
    out.push_back(std::move(pattern));
  }
  return out;
}

}  // namespace codedreduce
