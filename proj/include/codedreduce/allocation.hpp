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
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include <boost/rational.hpp>

#include "codedreduce/codes.hpp"
#include "codedreduce/topology.hpp"

namespace codedreduce {

/// Exact fraction of the dataset held by one worker.
using LoadFraction = boost::rational<std::int64_t>;

/// A contiguous range [begin, end) of 0-based global data-point indices, all
/// carrying the same combining coefficient.
struct WeightedSlice {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  double weight = 1.0;

  std::int64_t size() const { return end - begin; }
  friend bool operator==(const WeightedSlice&, const WeightedSlice&) = default;
};

/// A node's coded dataset. Slices are kept in ascending index order and never
/// overlap.
using CodedDataset = std::vector<WeightedSlice>;

std::int64_t point_count(std::span<const WeightedSlice> data);

/// Positional sub-range [first, first + count) of a coded dataset, splitting
/// slices at the boundaries and keeping their weights.
CodedDataset take_points(std::span<const WeightedSlice> data, std::int64_t first,
                         std::int64_t count);

/// 1 / sum_{l=1..L} (n/(s+1))^l.
LoadFraction r_cr(int n, int layers, int s);
/// (S+1)/N.
LoadFraction r_gc(int workers, int stragglers);

/// Smallest dataset size for which every split made by cr_allocate is a
/// whole number of points. Any multiple also works.
std::int64_t granularity(int n, int layers, int s);

/// Splits `data` into k = n equal positional parts and hands worker i the
/// union of the parts in the support of row i of B, each slice's weight
/// multiplied by the matching entry of B.
std::vector<CodedDataset> comp_alloc(std::span<const WeightedSlice> data,
                                     const EncodingMatrix& code);

/// Result of CR.Allocate: for every node its local coded dataset, the dataset
/// of the subtree rooted at it, and the remainder it passes to its children.
class Assignment {
 public:
  const RegularTree& tree() const { return tree_; }
  const EncodingMatrix& code() const { return code_; }
  std::int64_t data_size() const { return data_size_; }
  LoadFraction load() const { return load_; }
  std::int64_t points_per_node() const;

  const CodedDataset& local(NodeId node) const { return local_[tree_.offset(node)]; }
  const CodedDataset& subtree(NodeId node) const { return subtree_[tree_.offset(node)]; }
  const CodedDataset& remainder(NodeId node) const { return remainder_[tree_.offset(node)]; }
  const CodedDataset& local_at(std::size_t offset) const { return local_[offset]; }

 private:
  friend Assignment cr_allocate(const RegularTree&, const EncodingMatrix&, std::int64_t);
  Assignment(RegularTree tree, EncodingMatrix code, std::int64_t data_size);

  RegularTree tree_;
  EncodingMatrix code_;
  std::int64_t data_size_;
  LoadFraction load_;
  std::vector<CodedDataset> local_;
  std::vector<CodedDataset> subtree_;
  std::vector<CodedDataset> remainder_;
};

/// Layer by layer, CompAlloc spreads each parent's remainder over its
/// children's subtrees; every worker keeps the first r_CR * d points of its
/// subtree set (in index order) and passes the rest down.
Assignment cr_allocate(const RegularTree& tree, const EncodingMatrix& code, std::int64_t data_size);
Assignment cr_allocate(const RegularTree& tree, int s, std::int64_t data_size, std::uint64_t seed);

/// Gradient coding is CR on a single layer: an (N,1) tree.
Assignment gc_allocate(int workers, int stragglers, std::int64_t data_size, std::uint64_t seed);

/// Uncoded split of [0, d) into N equal contiguous unit-weight parts.
std::vector<CodedDataset> uniform_partition(std::int64_t data_size, int workers);

/// CSV with header node_layer,node_index,range_start,range_end,weight.
void write_assignment_csv(std::ostream& os, const Assignment& assignment);
std::map<NodeId, CodedDataset> read_assignment_csv(std::istream& is);

}  // namespace codedreduce
