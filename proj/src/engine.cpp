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

#include "codedreduce/engine.hpp"

#include <algorithm>

namespace codedreduce {

GradientOracle make_indicator_oracle(std::int64_t data_size) {
  return [data_size](const ModelVec&, std::span<const WeightedSlice> slices) {
    GradientVec g = GradientVec::Zero(data_size);
    for (const auto& slice : slices)
      g.segment(slice.begin, slice.size()).array() += slice.weight;
    return g;
  };
}

UnrecoverableError::UnrecoverableError(NodeId parent, int missing, int tolerated)
    : std::runtime_error("parent " + to_string(parent) + " lost " + std::to_string(missing) +
                         " children but tolerates only " + std::to_string(tolerated)),
      parent_(parent) {}

GradientVec cr_execute(const Assignment& assignment, const StragglerPattern& pattern,
                       const GradientOracle& oracle, const ModelVec& theta) {
  const auto& tree = assignment.tree();
  const auto& code = assignment.code();
  const int n = tree.fanout();
  const int s = code.stragglers();
  if (pattern.parent_count() != tree.parent_count())
    throw std::invalid_argument("straggler pattern built for a different tree");
  for (std::size_t p = 0; p < tree.parent_count(); ++p) {
    const int missing = static_cast<int>(pattern.slots(p).size());
    if (missing > s) throw UnrecoverableError(tree.node_at(p), missing, s);
  }

  // Messages indexed by node offset. Leaves send their local coded gradient;
  // parents are processed from the deepest layer up so children are ready.
  std::vector<GradientVec> message(tree.node_count());
  for (std::size_t off = tree.parent_count(); off < tree.node_count(); ++off)
    message[off] = oracle(theta, assignment.local_at(off));

  std::vector<int> survivors;
  for (std::size_t p = tree.parent_count(); p-- > 0;) {
    const NodeId parent = tree.node_at(p);
    survivors.clear();
    for (int slot = 0; slot < n && static_cast<int>(survivors.size()) < n - s; ++slot)
      if (!pattern.is_straggler(p, slot)) survivors.push_back(slot);
    const DecodeRow row = decode_row(code, survivors);

    GradientVec sum;
    for (int slot : survivors) {
      const auto& m = message[tree.offset(tree.child(parent, slot))];
      if (sum.size() == 0) sum = GradientVec::Zero(m.size());
      sum.noalias() += row.coefficients[slot] * m;
    }
    if (p != 0) sum += oracle(theta, assignment.local_at(p));
    message[p] = std::move(sum);
  }
  return message[0];
}

GradientVec gc_execute(const Assignment& assignment, std::span<const int> stragglers,
                       const GradientOracle& oracle, const ModelVec& theta) {
  if (assignment.tree().layers() != 1)
    throw std::invalid_argument("gc_execute needs a single-layer assignment");
  StragglerPattern pattern(assignment.tree());
  pattern.set(0, {stragglers.begin(), stragglers.end()});
  return cr_execute(assignment, pattern, oracle, theta);
}

GradientVec umw_execute(std::span<const CodedDataset> partition, const GradientOracle& oracle,
                        const ModelVec& theta) {
  return sgd_execute(partition, {}, oracle, theta);
}

GradientVec sgd_execute(std::span<const CodedDataset> partition, std::span<const int> stragglers,
                        const GradientOracle& oracle, const ModelVec& theta) {
  if (partition.empty()) throw std::invalid_argument("empty partition");
  GradientVec sum;
  const int workers = static_cast<int>(partition.size());
  for (int straggler : stragglers)
    if (straggler < 0 || straggler >= workers) throw std::out_of_range("straggler outside [0, N)");
  for (int w = 0; w < workers; ++w) {
    if (std::find(stragglers.begin(), stragglers.end(), w) != stragglers.end()) continue;
    GradientVec g = oracle(theta, partition[w]);
    if (sum.size() == 0) sum = GradientVec::Zero(g.size());
    sum += g;
  }
  if (sum.size() == 0) throw std::invalid_argument("every worker straggled");
  return sum;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> ring_segments(Eigen::Index length, int workers) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  const Eigen::Index base = length / workers;
  const Eigen::Index extra = length % workers;
  Eigen::Index start = 0;
  for (int w = 0; w < workers; ++w) {
    const Eigen::Index size = base + (w < extra ? 1 : 0);
    out.emplace_back(start, size);
    start += size;
  }
  return out;
}

std::vector<int> ring_reduce_scatter(std::vector<GradientVec>& buffers) {
  const int workers = static_cast<int>(buffers.size());
  const auto segments = ring_segments(buffers.front().size(), workers);
  for (int round = 0; round + 1 < workers; ++round) {
    // Snapshot outgoing segments first: every send in a round happens at once.
    std::vector<GradientVec> outgoing(workers);
    for (int i = 0; i < workers; ++i) {
      const int seg = ((i - round) % workers + workers) % workers;
      outgoing[i] = buffers[i].segment(segments[seg].first, segments[seg].second);
    }
    for (int i = 0; i < workers; ++i) {
      const int seg = ((i - round) % workers + workers) % workers;
      const int next = (i + 1) % workers;
      buffers[next].segment(segments[seg].first, segments[seg].second) += outgoing[i];
    }
  }
  std::vector<int> owned(workers);
  for (int i = 0; i < workers; ++i) owned[i] = (i + 1) % workers;
  return owned;
}

void ring_allgather(std::vector<GradientVec>& buffers, std::span<const int> owned) {
  const int workers = static_cast<int>(buffers.size());
  const auto segments = ring_segments(buffers.front().size(), workers);
  for (int round = 0; round + 1 < workers; ++round) {
    std::vector<GradientVec> outgoing(workers);
    std::vector<int> seg_of(workers);
    for (int i = 0; i < workers; ++i) {
      seg_of[i] = ((owned[i] - round) % workers + workers) % workers;
      outgoing[i] = buffers[i].segment(segments[seg_of[i]].first, segments[seg_of[i]].second);
    }
    for (int i = 0; i < workers; ++i) {
      const int next = (i + 1) % workers;
      buffers[next].segment(segments[seg_of[i]].first, segments[seg_of[i]].second) = outgoing[i];
    }
  }
}

std::vector<GradientVec> rar_execute(std::span<const CodedDataset> partition,
                                     const GradientOracle& oracle, const ModelVec& theta) {
  if (partition.empty()) throw std::invalid_argument("empty partition");
  std::vector<GradientVec> buffers;
  buffers.reserve(partition.size());
  for (const auto& part : partition) buffers.push_back(oracle(theta, part));
  const auto owned = ring_reduce_scatter(buffers);
  ring_allgather(buffers, owned);
  return buffers;
}

}  // namespace codedreduce
