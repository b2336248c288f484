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

#include "codedreduce/latency.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "codedreduce/csv.hpp"

namespace codedreduce {

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kCR: return "CR";
    case Scheme::kGC: return "GC";
    case Scheme::kUMW: return "UMW";
    case Scheme::kSGD: return "SGD";
    case Scheme::kRAR: return "RAR";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Scheme s : {Scheme::kCR, Scheme::kGC, Scheme::kUMW, Scheme::kSGD, Scheme::kRAR})
    if (scheme_name(s) == upper) return s;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

void LatencyConfig::validate() const {
  if (!(shift >= 0.0)) throw std::invalid_argument("latency: shift a must be >= 0");
  if (!(rate > 0.0)) throw std::invalid_argument("latency: rate mu must be > 0");
  if (!(comm_time >= 0.0)) throw std::invalid_argument("latency: t_c must be >= 0");
  if (!(data_size > 0.0)) throw std::invalid_argument("latency: d must be > 0");
}

LoadFraction SchemeSpec::load() const {
  switch (scheme) {
    case Scheme::kCR: return r_cr(fanout, layers, stragglers);
    case Scheme::kGC: return r_gc(fanout, stragglers);
    case Scheme::kUMW:
    case Scheme::kSGD:
    case Scheme::kRAR: return LoadFraction(1, fanout);
  }
  throw std::invalid_argument("unknown scheme");
}

int SchemeSpec::quorum() const {
  return scheme == Scheme::kUMW || scheme == Scheme::kRAR ? fanout : fanout - stragglers;
}

void SchemeSpec::validate() const {
  if (fanout < 1 || layers < 1) throw std::invalid_argument("scheme needs n >= 1 and L >= 1");
  if (scheme != Scheme::kCR && layers != 1)
    throw std::invalid_argument(std::string(scheme_name(scheme)) + " runs on a single layer");
  if (stragglers < 0 || stragglers >= fanout)
    throw std::invalid_argument(std::string(scheme_name(scheme)) + " needs 0 <= s < n");
  if ((scheme == Scheme::kUMW || scheme == Scheme::kRAR) && stragglers != 0)
    throw std::invalid_argument(std::string(scheme_name(scheme)) + " tolerates no stragglers");
}

double sample_comp_time(const LatencyConfig& cfg, double load_points, std::mt19937_64& rng) {
  if (!(load_points > 0.0)) throw std::invalid_argument("sample_comp_time needs a positive load");
  std::exponential_distribution<double> tail(cfg.rate / load_points);
  return cfg.shift * load_points + tail(rng);
}

double harmonic(int n) {
  double h = 0.0;
  for (int i = n; i >= 1; --i) h += 1.0 / i;
  return h;
}

double expected_order_stat(const LatencyConfig& cfg, int n, int s, LoadFraction load) {
  if (n < 1 || s < 0 || s >= n) throw std::invalid_argument("expected_order_stat needs 0 <= s < n");
  const double points = boost::rational_cast<double>(load) * cfg.data_size;
  return points / cfg.rate * (harmonic(n) - harmonic(s)) + cfg.shift * points;
}

std::string_view event_name(EventType type) {
  switch (type) {
    case EventType::kCompute: return "compute";
    case EventType::kReceive: return "receive";
    case EventType::kSend: return "send";
  }
  return "?";
}

namespace {

// Single-port receiver: children become ready at known times and are served
// one at a time, earliest-ready first (ties by slot), each for t_c. Service
// stops once `quorum` messages are in. Returns the time the last consumed
// message finished, or kNeverFinishes if the quorum cannot be met.
struct ReceivePort {
  std::vector<std::pair<double, int>> queue;

  double serve(NodeId parent, std::span<const double> ready, int quorum, double comm_time,
               const RegularTree& tree, std::vector<SimEvent>* events, std::vector<int>& unused) {
    queue.clear();
    for (int slot = 0; slot < static_cast<int>(ready.size()); ++slot)
      queue.emplace_back(ready[slot], slot);
    std::sort(queue.begin(), queue.end());
    double port_free = 0.0;
    int served = 0;
    unused.clear();
    for (const auto& [at, slot] : queue) {
      if (served == quorum || at == kNeverFinishes) {
        unused.push_back(slot);
        continue;
      }
      const double start = std::max(at, port_free);
      port_free = start + comm_time;
      ++served;
      if (events) {
        const NodeId child = tree.child(parent, slot);
        events->push_back({parent, EventType::kReceive, start, port_free, child});
        events->push_back({child, EventType::kSend, start, port_free, parent});
      }
    }
    return served == quorum ? port_free : kNeverFinishes;
  }
};

}  // namespace

SimOutcome replay_iteration(const SchemeSpec& spec, const LatencyConfig& cfg,
                            std::span<const double> compute_times, bool record_events) {
  spec.validate();
  const RegularTree tree = spec.topology();
  if (compute_times.size() != tree.node_count())
    throw std::invalid_argument("replay_iteration: one compute time per tree node expected");

  SimOutcome out;
  out.unused = StragglerPattern(tree);
  std::vector<SimEvent>* events = record_events ? &out.events : nullptr;
  if (events) {
    for (std::size_t off = 1; off < tree.node_count(); ++off) {
      const NodeId node = tree.node_at(off);
      events->push_back({node, EventType::kCompute, 0.0, compute_times[off], node});
    }
  }

  if (spec.scheme == Scheme::kRAR) {
    const double slowest = *std::max_element(compute_times.begin() + 1, compute_times.end());
    const int n = spec.fanout;
    out.completion_time = slowest + 2.0 * (n - 1) * (cfg.comm_time / n);
    return out;
  }

  // ready[off]: when node off can start sending to its parent.
  std::vector<double> ready(compute_times.begin(), compute_times.end());
  ReceivePort port;
  std::vector<int> unused;
  const int n = tree.fanout();
  const int quorum = spec.quorum();
  for (std::size_t p = tree.parent_count(); p-- > 0;) {
    const NodeId parent = tree.node_at(p);
    const std::size_t first_child = tree.offset(tree.child(parent, 0));
    const double received = port.serve(parent, std::span(ready).subspan(first_child, n), quorum,
                                       cfg.comm_time, tree, events, unused);
    out.unused.set(p, unused);
    ready[p] = p == 0 ? received : std::max(received, compute_times[p]);
  }
  out.completion_time = ready[0];
  return out;
}

SimOutcome simulate_iteration(const SchemeSpec& spec, const LatencyConfig& cfg,
                              std::mt19937_64& rng, bool record_events,
                              std::span<const NodeId> failed) {
  cfg.validate();
  spec.validate();
  const RegularTree tree = spec.topology();
  const double points = boost::rational_cast<double>(spec.load()) * cfg.data_size;
  std::vector<double> times(tree.node_count(), 0.0);
  for (std::size_t off = 1; off < times.size(); ++off) times[off] = sample_comp_time(cfg, points, rng);
  for (NodeId node : failed) times[tree.offset(node)] = kNeverFinishes;
  return replay_iteration(spec, cfg, times, record_events);
}

LatencyBounds cr_bounds(const LatencyConfig& cfg, int n, int layers, int s) {
  if (s < 1 || s >= n) throw std::invalid_argument("cr_bounds needs alpha = s/n in (0, 1)");
  const double alpha = static_cast<double>(s) / n;
  const double points = boost::rational_cast<double>(r_cr(n, layers, s)) * cfg.data_size;
  const double compute = points / cfg.rate * std::log(1.0 / alpha) + cfg.shift * points;
  return {compute + (n * (1.0 - alpha) + layers - 1) * cfg.comm_time,
          compute + static_cast<double>(n) * layers * cfg.comm_time};
}

LatencyEstimate mc_expected_latency(const SchemeSpec& spec, const LatencyConfig& cfg,
                                    std::size_t trials, unsigned threads) {
  if (trials < 1) throw std::invalid_argument("mc_expected_latency needs at least one trial");
  cfg.validate();
  spec.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));

  std::vector<double> samples(trials);
  auto run_block = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      std::mt19937_64 rng(cfg.seed + t);
      samples[t] = simulate_iteration(spec, cfg, rng).completion_time;
    }
  };
  if (threads == 1) {
    run_block(0, trials);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (trials + threads - 1) / threads;
    for (std::size_t begin = 0; begin < trials; begin += chunk)
      pool.emplace_back(run_block, begin, std::min(trials, begin + chunk));
  }

  LatencyEstimate est;
  est.trials = trials;
  est.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(trials);
  if (trials > 1) {
    double sq = 0.0;
    for (double x : samples) sq += (x - est.mean) * (x - est.mean);
    est.stddev = std::sqrt(sq / static_cast<double>(trials - 1));
    est.half_width_95 = 1.96 * est.stddev / std::sqrt(static_cast<double>(trials));
  }
  return est;
}

void write_event_log_csv(std::ostream& os, const SimOutcome& outcome) {
  os << "node,event_type,t_start,t_end\n";
  for (const auto& e : outcome.events)
    os << e.node.layer << ':' << e.node.index << ',' << event_name(e.type) << ','
       << csv::format_double(e.start) << ',' << csv::format_double(e.end) << '\n';
}

std::vector<SimEvent> read_event_log_csv(std::istream& is) {
  const auto table = csv::read_table(is, true);
  std::vector<SimEvent> out;
  for (const auto& row : table.rows) {
    if (row.size() != 4) throw std::runtime_error("event log row has wrong width");
    const auto colon = row[0].find(':');
    if (colon == std::string::npos) throw std::runtime_error("event log node must be layer:index");
    const NodeId node{static_cast<int>(csv::parse_int(row[0].substr(0, colon))),
                      csv::parse_int(row[0].substr(colon + 1))};
    EventType type;
    if (row[1] == "compute") type = EventType::kCompute;
    else if (row[1] == "receive") type = EventType::kReceive;
    else if (row[1] == "send") type = EventType::kSend;
    else throw std::runtime_error("unknown event type '" + row[1] + "'");
    out.push_back({node, type, csv::parse_double(row[2]), csv::parse_double(row[3]), node});
  }
  return out;
}

}  // namespace codedreduce
