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

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "codedreduce/allocation.hpp"
#include "codedreduce/topology.hpp"

namespace codedreduce {

using GradientVec = Eigen::VectorXd;
using ModelVec = Eigen::VectorXd;

/// sum over the points of each slice of weight * grad loss(theta; x). Must be
/// additive over disjoint slice lists and homogeneous in the weights.
using GradientOracle =
    std::function<GradientVec(const ModelVec& theta, std::span<const WeightedSlice> slices)>;

/// Oracle whose per-point gradient is the indicator e_x of the point itself,
/// so an aggregate equals the net coefficient each point received.
GradientOracle make_indicator_oracle(std::int64_t data_size);

/// Raised when some parent lost more children than its code tolerates.
class UnrecoverableError : public std::runtime_error {
 public:
  UnrecoverableError(NodeId parent, int missing, int tolerated);
  NodeId parent() const { return parent_; }

 private:
  NodeId parent_;
};

/// Decode-and-forward up the tree. Each parent decodes from the lowest-indexed
/// n - s responding children, adds its own local coded gradient and forwards;
/// the master's decoded sum is returned.
GradientVec cr_execute(const Assignment& assignment, const StragglerPattern& pattern,
                       const GradientOracle& oracle, const ModelVec& theta);

/// Gradient coding on N workers; `assignment` must come from gc_allocate
/// (an (N,1) tree). `stragglers` are 0-based worker positions.
GradientVec gc_execute(const Assignment& assignment, std::span<const int> stragglers,
                       const GradientOracle& oracle, const ModelVec& theta);

/// Uncoded master-worker: sum of all N partial gradients.
GradientVec umw_execute(std::span<const CodedDataset> partition, const GradientOracle& oracle,
                        const ModelVec& theta);

/// Partial sum over the N - S workers not listed in `stragglers`.
GradientVec sgd_execute(std::span<const CodedDataset> partition, std::span<const int> stragglers,
                        const GradientOracle& oracle, const ModelVec& theta);

/// Contiguous split of [0, p) into N segments whose sizes differ by at most one.
std::vector<std::pair<Eigen::Index, Eigen::Index>> ring_segments(Eigen::Index length, int workers);

/// Reduce-scatter over a ring, in place. In round r worker i sends segment
/// (i - r) mod N to worker i+1, which accumulates it. Returns, for each
/// worker, the segment it holds fully reduced afterwards: (i + 1) mod N.
std::vector<int> ring_reduce_scatter(std::vector<GradientVec>& buffers);

/// Allgather over a ring, in place, starting from the ownership returned by
/// ring_reduce_scatter.
void ring_allgather(std::vector<GradientVec>& buffers, std::span<const int> owned);

/// Ring-AllReduce at the data level; every worker's copy of the full gradient.
std::vector<GradientVec> rar_execute(std::span<const CodedDataset> partition,
                                     const GradientOracle& oracle, const ModelVec& theta);

}  // namespace codedreduce
