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

#include "codedreduce/allocation.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "codedreduce/csv.hpp"

namespace codedreduce {

std::int64_t point_count(std::span<const WeightedSlice> data) {
  std::int64_t total = 0;
  for (const auto& slice : data) total += slice.size();
  return total;
}

CodedDataset take_points(std::span<const WeightedSlice> data, std::int64_t first,
                         std::int64_t count) {
  if (first < 0 || count < 0) throw std::invalid_argument("take_points: negative range");
  CodedDataset out;
  std::int64_t pos = 0;
  const std::int64_t stop = first + count;
  for (const auto& slice : data) {
    const std::int64_t lo = std::max(first, pos);
    const std::int64_t hi = std::min(stop, pos + slice.size());
    if (lo < hi) {
      out.push_back({slice.begin + (lo - pos), slice.begin + (hi - pos), slice.weight});
    }
    pos += slice.size();
    if (pos >= stop) break;
  }
  if (point_count(out) != count) throw std::out_of_range("take_points: range exceeds dataset");
  return out;
}

LoadFraction r_cr(int n, int layers, int s) {
  if (n < 1 || layers < 1 || s < 0 || s >= n)
    throw std::invalid_argument("r_cr needs 0 <= s < n and L >= 1");
  // Guard the int64 arithmetic; exact loads beyond this are not meaningful here.
  if (layers * std::log2(static_cast<double>(n) / (s + 1)) + std::log2(layers) > 60.0)
    throw std::overflow_error("r_cr: (n/(s+1))^L overflows 64-bit rationals");
  const LoadFraction ratio(n, s + 1);
  LoadFraction power(1);
  LoadFraction sum(0);
  for (int l = 1; l <= layers; ++l) {
    power *= ratio;
    sum += power;
  }
  return LoadFraction(1) / sum;
}

LoadFraction r_gc(int workers, int stragglers) {
  if (workers < 1 || stragglers < 0 || stragglers >= workers)
    throw std::invalid_argument("r_gc needs 0 <= S < N");
  return LoadFraction(stragglers + 1, workers);
}

std::int64_t granularity(int n, int layers, int s) {
  const LoadFraction local = r_cr(n, layers, s);
  std::int64_t lcm = local.denominator();
  auto absorb = [&lcm](const LoadFraction& f) { lcm = std::lcm(lcm, f.denominator()); };

  LoadFraction incoming(1);  // remainder entering the current layer, as a fraction of d
  for (int l = 1; l <= layers; ++l) {
    const LoadFraction part = incoming / n;
    const LoadFraction subtree = part * (s + 1);
    absorb(part);
    absorb(subtree);
    incoming = subtree - local;
    absorb(incoming);
  }
  return lcm;
}

std::vector<CodedDataset> comp_alloc(std::span<const WeightedSlice> data,
                                     const EncodingMatrix& code) {
  const std::int64_t total = point_count(data);
  const int k = code.partitions();
  if (total % k != 0)
    throw std::invalid_argument("comp_alloc: " + std::to_string(total) +
                                " points do not split into " + std::to_string(k) + " parts");
  const std::int64_t part_size = total / k;
  std::vector<CodedDataset> parts;
  parts.reserve(static_cast<std::size_t>(k));
  for (int kappa = 0; kappa < k; ++kappa) parts.push_back(take_points(data, kappa * part_size, part_size));

  std::vector<CodedDataset> out(static_cast<std::size_t>(code.workers()));
  for (int i = 0; i < code.workers(); ++i) {
    for (int kappa = 0; kappa < k; ++kappa) {
      const double b = code(i, kappa);
      if (b == 0.0) continue;
      for (const auto& slice : parts[kappa]) out[i].push_back({slice.begin, slice.end, slice.weight * b});
    }
  }
  return out;
}

Assignment::Assignment(RegularTree tree, EncodingMatrix code, std::int64_t data_size)
    : tree_(std::move(tree)),
      code_(std::move(code)),
      data_size_(data_size),
      load_(r_cr(tree_.fanout(), tree_.layers(), code_.stragglers())),
      local_(tree_.node_count()),
      subtree_(tree_.node_count()),
      remainder_(tree_.node_count()) {}

std::int64_t Assignment::points_per_node() const {
  const LoadFraction count = load_ * data_size_;
  return boost::rational_cast<std::int64_t>(count);
}

Assignment cr_allocate(const RegularTree& tree, const EncodingMatrix& code, std::int64_t data_size) {
  const int n = tree.fanout();
  const int s = code.stragglers();
  if (code.workers() != n)
    throw std::invalid_argument("cr_allocate: code has " + std::to_string(code.workers()) +
                                " rows but the tree has fanout " + std::to_string(n));
  if (data_size < 1) throw std::invalid_argument("cr_allocate: empty dataset");
  const std::int64_t grain = granularity(n, tree.layers(), s);
  if (data_size % grain != 0)
    throw std::invalid_argument("cr_allocate: d=" + std::to_string(data_size) +
                                " is not a multiple of the granularity " + std::to_string(grain));

  Assignment out(tree, code, data_size);
  const std::int64_t keep = out.points_per_node();

  const std::size_t master = tree.offset(kMaster);
  out.subtree_[master] = {{0, data_size, 1.0}};
  out.remainder_[master] = out.subtree_[master];

  for (std::size_t p = 0; p < tree.parent_count(); ++p) {
    const NodeId parent = tree.node_at(p);
    auto shares = comp_alloc(out.remainder_[p], code);
    for (int slot = 0; slot < n; ++slot) {
      const std::size_t c = tree.offset(tree.child(parent, slot));
      auto& subtree = out.subtree_[c];
      subtree = std::move(shares[slot]);
      const std::int64_t size = point_count(subtree);
      out.local_[c] = take_points(subtree, 0, keep);
      out.remainder_[c] = take_points(subtree, keep, size - keep);
    }
  }
  for (std::size_t c = tree.parent_count(); c < tree.node_count(); ++c) {
    if (!out.remainder_[c].empty())
      throw std::logic_error("cr_allocate: leaf " + to_string(tree.node_at(c)) +
                             " was left with undistributed points");
  }
  return out;
}

Assignment cr_allocate(const RegularTree& tree, int s, std::int64_t data_size, std::uint64_t seed) {
  if (s < 0 || s >= tree.fanout()) throw std::invalid_argument("cr_allocate needs 0 <= s < n");
  return cr_allocate(tree, build_encoding(tree.fanout(), s, seed), data_size);
}

Assignment gc_allocate(int workers, int stragglers, std::int64_t data_size, std::uint64_t seed) {
  return cr_allocate(RegularTree(workers, 1), stragglers, data_size, seed);
}

std::vector<CodedDataset> uniform_partition(std::int64_t data_size, int workers) {
  if (workers < 1) throw std::invalid_argument("uniform_partition needs N >= 1");
  if (data_size < workers || data_size % workers != 0)
    throw std::invalid_argument("uniform_partition: d=" + std::to_string(data_size) +
                                " is not divisible by N=" + std::to_string(workers));
  const std::int64_t part = data_size / workers;
  std::vector<CodedDataset> out;
  for (int w = 0; w < workers; ++w) out.push_back({{w * part, (w + 1) * part, 1.0}});
  return out;
}

void write_assignment_csv(std::ostream& os, const Assignment& assignment) {
  const auto& tree = assignment.tree();
  os << "node_layer,node_index,range_start,range_end,weight\n";
  for (std::size_t off = 1; off < tree.node_count(); ++off) {
    const NodeId node = tree.node_at(off);
    for (const auto& slice : assignment.local_at(off))
      os << node.layer << ',' << node.index << ',' << slice.begin << ',' << slice.end << ','
         << csv::format_double(slice.weight) << '\n';
  }
}

std::map<NodeId, CodedDataset> read_assignment_csv(std::istream& is) {
  const auto table = csv::read_table(is, true);
  if (table.header.size() != 5) throw std::runtime_error("assignment csv needs 5 columns");
  std::map<NodeId, CodedDataset> out;
  for (const auto& row : table.rows) {
    if (row.size() != 5) throw std::runtime_error("assignment csv row has wrong width");
    const NodeId node{static_cast<int>(csv::parse_int(row[0])), csv::parse_int(row[1])};
    out[node].push_back({csv::parse_int(row[2]), csv::parse_int(row[3]), csv::parse_double(row[4])});
  }
  return out;
}

}  // namespace codedreduce
