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

#include "codedreduce/ml.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "codedreduce/csv.hpp"

namespace codedreduce {

Dataset::Dataset(Eigen::MatrixXd points, Origin origin) : points_(std::move(points)), origin_(origin) {
  if (points_.rows() < 1 || points_.cols() < 2)
    throw std::invalid_argument("dataset needs at least one sample with one feature and a label");
  if (!points_.allFinite()) throw std::invalid_argument("dataset has non-finite entries");
}

SyntheticData generate_synthetic(Eigen::Index samples, Eigen::Index features, std::uint64_t seed,
                                 double noise) {
  if (samples < 1 || features < 1) throw std::invalid_argument("generate_synthetic needs d, p >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ModelVec theta(features);
  for (auto& v : theta) v = normal(rng);
  Eigen::MatrixXd points(samples, features + 1);
  for (Eigen::Index j = 0; j < samples; ++j) {
    for (Eigen::Index k = 0; k < features; ++k) points(j, k) = normal(rng);
    const double z = normal(rng);
    points(j, features) = points.row(j).head(features).dot(theta) + noise * z;
  }
  return {Dataset(std::move(points), Dataset::Origin::kSynthetic), std::move(theta)};
}

Dataset read_dataset_csv(std::istream& is) {
  auto table = csv::read_table(is, false);
  if (!table.rows.empty()) {
    try {
      csv::parse_double(table.rows.front().front());
    } catch (const std::invalid_argument&) {
      table.rows.erase(table.rows.begin());
    }
  }
  if (table.rows.empty()) throw std::runtime_error("dataset csv has no samples");
  const auto cols = table.rows.front().size();
  Eigen::MatrixXd points(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != cols)
      throw std::runtime_error("dataset csv row " + std::to_string(r + 1) + " has wrong width");
    for (std::size_t c = 0; c < cols; ++c)
      points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          csv::parse_double(table.rows[r][c]);
  }
  return Dataset(std::move(points), Dataset::Origin::kIngested);
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  const auto& m = data.points();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << csv::format_double(m(r, c));
    os << '\n';
  }
}

namespace {

void check_slices(std::span<const WeightedSlice> slices, const Dataset& data) {
  for (const auto& s : slices)
    if (s.begin < 0 || s.end > data.size() || s.begin >= s.end)
      throw std::out_of_range("slice [" + std::to_string(s.begin) + ", " + std::to_string(s.end) +
                              ") outside the dataset");
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

GradientVec linear_grad(const ModelVec& theta, std::span<const WeightedSlice> slices,
                        const Dataset& data) {
  check_slices(slices, data);
  GradientVec g = GradientVec::Zero(data.features());
  for (const auto& s : slices) {
    const auto x = data.x().middleRows(s.begin, s.size());
    const Eigen::VectorXd residual = x * theta - data.y().segment(s.begin, s.size());
    g.noalias() += s.weight * (x.transpose() * residual);
  }
  return g;
}

GradientVec logistic_grad(const ModelVec& theta, std::span<const WeightedSlice> slices,
                          const Dataset& data) {
  check_slices(slices, data);
  GradientVec g = GradientVec::Zero(data.features());
  for (const auto& s : slices) {
    const auto x = data.x().middleRows(s.begin, s.size());
    Eigen::VectorXd residual = (x * theta).unaryExpr(&sigmoid);
    residual -= data.y().segment(s.begin, s.size());
    g.noalias() += s.weight * (x.transpose() * residual);
  }
  return g;
}

double loss_value(LossKind kind, const ModelVec& theta, std::span<const WeightedSlice> slices,
                  const Dataset& data) {
  check_slices(slices, data);
  double total = 0.0;
  for (const auto& s : slices) {
    const auto x = data.x().middleRows(s.begin, s.size());
    const Eigen::VectorXd z = x * theta;
    const auto y = data.y().segment(s.begin, s.size());
    double part = 0.0;
    if (kind == LossKind::kLinear) {
      part = 0.5 * (z - y).squaredNorm();
    } else {
      // log(1 + e^z) - y z, written to stay finite for large |z|.
      for (Eigen::Index j = 0; j < z.size(); ++j)
        part += std::max(z[j], 0.0) + std::log1p(std::exp(-std::abs(z[j]))) - y[j] * z[j];
    }
    total += s.weight * part;
  }
  return total;
}

GradientOracle make_oracle(LossKind kind, const Dataset& data) {
  if (kind == LossKind::kLinear)
    return [&data](const ModelVec& theta, std::span<const WeightedSlice> slices) {
      return linear_grad(theta, slices, data);
    };
  return [&data](const ModelVec& theta, std::span<const WeightedSlice> slices) {
    return logistic_grad(theta, slices, data);
  };
}

double smoothness_constant(const Dataset& data) {
  const Eigen::MatrixXd gram = data.x().transpose() * data.x();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

double StepSchedule::at(int iteration) const { return decaying ? c1 / (iteration + c2) : eta; }

void GDConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("gd: iterations must be >= 1");
  if (!step.decaying && !(step.eta > 0.0)) throw std::invalid_argument("gd: eta must be > 0");
  if (step.decaying && (!(step.c1 > 0.0) || !(step.c2 > 0.0)))
    throw std::invalid_argument("gd: decaying step needs c1, c2 > 0");
  if (!(l2 >= 0.0)) throw std::invalid_argument("gd: lambda must be >= 0");
  scheme.validate();
  if (latency) latency->validate();
}

namespace {

// Produces one iteration's gradient for the configured scheme, together with
// the simulated time the round took.
class Aggregator {
 public:
  Aggregator(const Dataset& data, const GDConfig& config)
      : spec_(config.scheme), oracle_(make_oracle(config.loss, data)), latency_(config.latency),
        rng_(config.seed) {
    const std::int64_t d = data.size();
    switch (spec_.scheme) {
      case Scheme::kCR:
        assignment_.emplace(cr_allocate(spec_.topology(), spec_.stragglers, d, config.seed));
        break;
      case Scheme::kGC:
        assignment_.emplace(gc_allocate(spec_.fanout, spec_.stragglers, d, config.seed));
        break;
      default:
        partition_ = uniform_partition(d, spec_.fanout);
    }
    if (latency_) latency_->data_size = static_cast<double>(d);
  }

  std::pair<GradientVec, double> round(const ModelVec& theta) {
    const RegularTree tree = spec_.topology();
    StragglerPattern pattern(tree);
    double elapsed = 0.0;
    if (latency_) {
      auto outcome = simulate_iteration(spec_, *latency_, rng_);
      elapsed = outcome.completion_time;
      pattern = std::move(outcome.unused);
    } else if (spec_.stragglers > 0) {
      std::vector<int> slots(static_cast<std::size_t>(tree.fanout()));
      std::iota(slots.begin(), slots.end(), 0);
      for (std::size_t p = 0; p < tree.parent_count(); ++p) {
        std::vector<int> chosen;
        std::sample(slots.begin(), slots.end(), std::back_inserter(chosen), spec_.stragglers, rng_);
        pattern.set(p, std::move(chosen));
      }
    }
    const auto master = pattern.slots(0);
    switch (spec_.scheme) {
      case Scheme::kCR: return {cr_execute(*assignment_, pattern, oracle_, theta), elapsed};
      case Scheme::kGC: return {gc_execute(*assignment_, master, oracle_, theta), elapsed};
      case Scheme::kUMW: return {umw_execute(partition_, oracle_, theta), elapsed};
      case Scheme::kSGD: return {sgd_execute(partition_, master, oracle_, theta), elapsed};
      case Scheme::kRAR: return {rar_execute(partition_, oracle_, theta).front(), elapsed};
    }
    throw std::logic_error("unhandled scheme");
  }

 private:
  SchemeSpec spec_;
  GradientOracle oracle_;
  std::optional<LatencyConfig> latency_;
  std::mt19937_64 rng_;
  std::optional<Assignment> assignment_;
  std::vector<CodedDataset> partition_;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double normalized_error(const ModelVec& theta, const ModelVec* true_model) {
  if (!true_model) return kNaN;
  return (theta - *true_model).squaredNorm() / true_model->squaredNorm();
}

}  // namespace

std::vector<TraceRow> gd_run(const Dataset& data, const GDConfig& config,
                             const ModelVec* true_model) {
  config.validate();
  if (true_model && true_model->size() != data.features())
    throw std::invalid_argument("gd: true model dimension does not match the dataset");
  Aggregator aggregator(data, config);

  std::vector<TraceRow> trace;
  trace.reserve(static_cast<std::size_t>(config.iterations) + 1);
  ModelVec theta = ModelVec::Zero(data.features());
  trace.push_back({0, 0.0, kNaN, normalized_error(theta, true_model), theta});

  double clock = 0.0;
  for (int t = 0; t < config.iterations; ++t) {
    auto [g, elapsed] = aggregator.round(theta);
    clock += elapsed;
    ModelVec next = theta - config.step.at(t) * (g + config.l2 * theta);
    const double prev_sq = theta.squaredNorm();
    const double rer = prev_sq > 0.0 ? (next - theta).squaredNorm() / prev_sq : kNaN;
    theta = std::move(next);
    trace.push_back({t + 1, clock, rer, normalized_error(theta, true_model), theta});
  }
  return trace;
}

void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace) {
  os << "iter,wall_sim_time,rer,ner\n";
  for (const auto& row : trace)
    os << row.iteration << ',' << csv::format_double(row.sim_time) << ','
       << csv::format_double(row.rer) << ',' << csv::format_double(row.ner) << '\n';
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
  const auto table = csv::read_table(is, true);
  std::vector<TraceRow> out;
  for (const auto& row : table.rows) {
    if (row.size() != 4) throw std::runtime_error("trace row has wrong width");
    TraceRow r;
    r.iteration = static_cast<int>(csv::parse_int(row[0]));
    r.sim_time = csv::parse_double(row[1]);
    r.rer = csv::parse_double(row[2]);
    r.ner = csv::parse_double(row[3]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace codedreduce
