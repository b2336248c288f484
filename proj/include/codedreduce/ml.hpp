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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "codedreduce/engine.hpp"
#include "codedreduce/latency.hpp"

namespace codedreduce {

/// d labeled samples stored as rows of a d x (p+1) matrix; the label is the
/// last coordinate.
class Dataset {
 public:
  enum class Origin { kSynthetic, kIngested };

  Dataset(Eigen::MatrixXd points, Origin origin);

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index features() const { return points_.cols() - 1; }
  Origin origin() const { return origin_; }

  const Eigen::MatrixXd& points() const { return points_; }
  auto x() const { return points_.leftCols(features()); }
  auto y() const { return points_.col(features()); }

 private:
  Eigen::MatrixXd points_;
  Origin origin_;
};

struct SyntheticData {
  Dataset data;
  ModelVec true_model;
};

/// Features and true model drawn from N(0, I); label = <x, theta*> + noise * z
/// with z standard normal.
SyntheticData generate_synthetic(Eigen::Index samples, Eigen::Index features, std::uint64_t seed,
                                 double noise = 1.0);

/// One sample per row: p feature columns then the label. A leading
/// non-numeric line is treated as a header.
Dataset read_dataset_csv(std::istream& is);
void write_dataset_csv(std::ostream& os, const Dataset& data);

enum class LossKind { kLinear, kLogistic };

/// Squared loss 1/2 (x.theta - y)^2, gradient (x.theta - y) x.
GradientVec linear_grad(const ModelVec& theta, std::span<const WeightedSlice> slices,
                        const Dataset& data);
/// Cross-entropy with labels in {0, 1}; gradient (sigmoid(x.theta) - y) x.
GradientVec logistic_grad(const ModelVec& theta, std::span<const WeightedSlice> slices,
                          const Dataset& data);

/// Weighted loss over the slices, matching the gradients above.
double loss_value(LossKind kind, const ModelVec& theta, std::span<const WeightedSlice> slices,
                  const Dataset& data);

/// Binds the dataset by reference; it must outlive the oracle.
GradientOracle make_oracle(LossKind kind, const Dataset& data);

/// Largest eigenvalue of X^T X, the smoothness constant of the summed squared loss.
double smoothness_constant(const Dataset& data);

/// Constant eta, or c1 / (t + c2) when `decaying` is set.
struct StepSchedule {
  double eta = 1e-3;
  bool decaying = false;
  double c1 = 1.0;
  double c2 = 1.0;

  double at(int iteration) const;
};

struct GDConfig {
  StepSchedule step;
  int iterations = 100;
  double l2 = 0.0;  // lambda in theta <- theta - eta (g + lambda theta)
  LossKind loss = LossKind::kLinear;
  SchemeSpec scheme = SchemeSpec::umw(1);
  /// Seeds the encoding matrix and the per-iteration straggler draws.
  std::uint64_t seed = 0;
  /// When present each iteration's straggler pattern is the one realized by
  /// the timing simulation and simulated time accumulates; otherwise
  /// stragglers are drawn uniformly and simulated time stays 0.
  std::optional<LatencyConfig> latency;

  void validate() const;
};

struct TraceRow {
  int iteration = 0;
  double sim_time = 0.0;
  double rer = 0.0;  // ||theta_t - theta_{t-1}||^2 / ||theta_{t-1}||^2, NaN when undefined
  double ner = 0.0;  // ||theta_t - theta*||^2 / ||theta*||^2, NaN without theta*
  ModelVec theta;
};

/// Runs GD from theta = 0, pulling each gradient from the configured scheme.
/// Row 0 is the initial model. SGD deliberately steps with a partial gradient.
std::vector<TraceRow> gd_run(const Dataset& data, const GDConfig& config,
                             const ModelVec* true_model = nullptr);

/// CSV with header iter,wall_sim_time,rer,ner.
void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace);
std::vector<TraceRow> read_trace_csv(std::istream& is);

}  // namespace codedreduce
