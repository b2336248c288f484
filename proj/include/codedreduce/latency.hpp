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
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codedreduce/allocation.hpp"
#include "codedreduce/topology.hpp"

namespace codedreduce {

enum class Scheme { kCR, kGC, kUMW, kSGD, kRAR };

std::string_view scheme_name(Scheme scheme);
/// Accepts CR, GC, UMW, SGD, RAR (case-insensitive).
Scheme parse_scheme(std::string_view name);

/// Timing model. Worker compute time on d_i points is
/// a * d_i + Exp(rate mu / d_i); every child-to-parent message occupies the
/// parent's single receive port for t_c.
struct LatencyConfig {
  double shift = 0.0;      // a, time per data point
  double rate = 1.0;       // mu
  double comm_time = 0.0;  // t_c
  double data_size = 1.0;  // d
  std::uint64_t seed = 0;

  void validate() const;
};

/// Which aggregation scheme runs on which topology. CR uses an (n,L) tree with
/// s stragglers per parent; the flat schemes use N workers and S stragglers.
struct SchemeSpec {
  Scheme scheme = Scheme::kCR;
  int fanout = 1;      // n for CR, N otherwise
  int layers = 1;      // L for CR, 1 otherwise
  int stragglers = 0;  // s for CR, S for GC and SGD

  static SchemeSpec cr(int n, int layers, int s) { return {Scheme::kCR, n, layers, s}; }
  static SchemeSpec gc(int workers, int s) { return {Scheme::kGC, workers, 1, s}; }
  static SchemeSpec umw(int workers) { return {Scheme::kUMW, workers, 1, 0}; }
  static SchemeSpec sgd(int workers, int s) { return {Scheme::kSGD, workers, 1, s}; }
  static SchemeSpec rar(int workers) { return {Scheme::kRAR, workers, 1, 0}; }

  RegularTree topology() const { return RegularTree(fanout, layers); }
  /// Fraction of the dataset each worker processes.
  LoadFraction load() const;
  /// Messages a parent waits for before it is done receiving.
  int quorum() const;
  void validate() const;
};

double sample_comp_time(const LatencyConfig& cfg, double load_points, std::mt19937_64& rng);

double harmonic(int n);

/// Mean of the (n-s)-th order statistic of n compute times on r*d points:
/// (r d / mu)(H_n - H_s) + a r d.
double expected_order_stat(const LatencyConfig& cfg, int n, int s, LoadFraction load);

enum class EventType { kCompute, kReceive, kSend };
std::string_view event_name(EventType type);

struct SimEvent {
  NodeId node;
  EventType type;
  double start;
  double end;
  NodeId peer;  // the other end of a receive/send; the node itself for compute
};

struct SimOutcome {
  double completion_time = 0.0;
  std::vector<SimEvent> events;  // filled only when requested
  /// Children each parent did not consume (the realized stragglers); empty
  /// for RAR.
  StragglerPattern unused;
};

inline constexpr double kNeverFinishes = std::numeric_limits<double>::infinity();

/// Deterministic replay given every worker's compute time, indexed by tree
/// offset (entry 0, the master, is ignored). A time of kNeverFinishes marks a
/// failed worker.
SimOutcome replay_iteration(const SchemeSpec& spec, const LatencyConfig& cfg,
                            std::span<const double> compute_times, bool record_events = false);

/// Draws compute times and replays one iteration. Workers listed in
/// `failed` never finish.
SimOutcome simulate_iteration(const SchemeSpec& spec, const LatencyConfig& cfg,
                              std::mt19937_64& rng, bool record_events = false,
                              std::span<const NodeId> failed = {});

struct LatencyBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Envelope for E[T_CR] with the vanishing terms dropped:
///   lower = (r d/mu) ln(1/alpha) + a r d + (n(1 - alpha) + L - 1) t_c
///   upper = (r d/mu) ln(1/alpha) + a r d + n L t_c
LatencyBounds cr_bounds(const LatencyConfig& cfg, int n, int layers, int s);

struct LatencyEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
  double stddev = 0.0;
  std::size_t trials = 0;
};

/// Monte Carlo over independent trials; trial t uses a generator seeded with
/// cfg.seed + t, so the result does not depend on the thread count.
LatencyEstimate mc_expected_latency(const SchemeSpec& spec, const LatencyConfig& cfg,
                                    std::size_t trials, unsigned threads = 0);

/// CSV with header node,event_type,t_start,t_end; node is written "layer:index".
void write_event_log_csv(std::ostream& os, const SimOutcome& outcome);
std::vector<SimEvent> read_event_log_csv(std::istream& is);

}  // namespace codedreduce
