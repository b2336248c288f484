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

#include <map>
#include <sstream>

#include <gtest/gtest.h>

namespace codedreduce {
namespace {

LatencyConfig config(double a, double mu, double tc, double d, std::uint64_t seed = 1) {
  LatencyConfig cfg;
  cfg.shift = a;
  cfg.rate = mu;
  cfg.comm_time = tc;
  cfg.data_size = d;
  cfg.seed = seed;
  return cfg;
}

TEST(Schemes, NamesRoundTrip) {
  for (Scheme s : {Scheme::kCR, Scheme::kGC, Scheme::kUMW, Scheme::kSGD, Scheme::kRAR})
    EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  EXPECT_EQ(parse_scheme("cr"), Scheme::kCR);
  EXPECT_THROW(parse_scheme("allreduce"), std::invalid_argument);
}

TEST(Schemes, LoadsAndQuorums) {
  EXPECT_EQ(SchemeSpec::cr(3, 2, 1).load(), LoadFraction(4, 15));
  EXPECT_EQ(SchemeSpec::gc(156, 13).load(), LoadFraction(7, 78));
  EXPECT_EQ(SchemeSpec::umw(12).load(), LoadFraction(1, 12));
  EXPECT_EQ(SchemeSpec::cr(3, 2, 1).quorum(), 2);
  EXPECT_EQ(SchemeSpec::umw(12).quorum(), 12);
  EXPECT_EQ(SchemeSpec::sgd(12, 3).quorum(), 9);
  EXPECT_THROW(SchemeSpec::gc(4, 4).validate(), std::invalid_argument);
  EXPECT_THROW((SchemeSpec{Scheme::kGC, 4, 2, 1}).validate(), std::invalid_argument);
}

TEST(LatencyConfig, Validation) {
  EXPECT_THROW(config(-1, 1, 0, 1).validate(), std::invalid_argument);
  EXPECT_THROW(config(0, 0, 0, 1).validate(), std::invalid_argument);
  EXPECT_THROW(config(0, 1, -1, 1).validate(), std::invalid_argument);
}

TEST(SampleCompTime, UnitExponentialMean) {
  const auto cfg = config(0, 1, 0, 1);
  std::mt19937_64 rng(5);
  double sum = 0.0;
  const int draws = 1000000;
  for (int k = 0; k < draws; ++k) sum += sample_comp_time(cfg, 1.0, rng);
  EXPECT_NEAR(sum / draws, 1.0, 0.01);
}

TEST(SampleCompTime, ShiftIsSupportFloor) {
  const auto cfg = config(2, 1, 0, 1);
  std::mt19937_64 rng(6);
  for (int k = 0; k < 10000; ++k) EXPECT_GE(sample_comp_time(cfg, 5.0, rng), 10.0);
}

TEST(SampleCompTime, ShiftedMean) {
  const auto cfg = config(0.5, 2, 0, 1);
  std::mt19937_64 rng(7);
  double sum = 0.0;
  const int draws = 200000;
  for (int k = 0; k < draws; ++k) sum += sample_comp_time(cfg, 100.0, rng);
  EXPECT_NEAR(sum / draws, 100.0, 1.0);
  EXPECT_THROW(sample_comp_time(cfg, 0.0, rng), std::invalid_argument);
}

TEST(OrderStat, ClosedForms) {
  EXPECT_NEAR(expected_order_stat(config(0, 1, 0, 1), 2, 1, 1), 0.5, 1e-12);
  EXPECT_NEAR(expected_order_stat(config(0, 1, 0, 1), 10, 3, 1), 1.0956349206349207, 1e-12);
  EXPECT_NEAR(expected_order_stat(config(1, 1, 0, 1), 3, 0, 1), 2.8333333333333335, 1e-12);
  EXPECT_THROW(expected_order_stat(config(0, 1, 0, 1), 3, 3, 1), std::invalid_argument);
}

TEST(OrderStat, MonteCarloAgreesForSmallGroups) {
  for (auto [n, s] : {std::pair{5, 1}, {12, 4}, {20, 7}}) {
    const auto cfg = config(0.2, 1.5, 0, 10, 3);
    const auto spec = SchemeSpec::cr(n, 1, s);
    const auto est = mc_expected_latency(spec, cfg, 100000);
    const double expected = expected_order_stat(cfg, n, s, spec.load());
    EXPECT_NEAR(est.mean / expected, 1.0, 0.02) << n << "," << s;
  }
}

TEST(Simulate, FreeCommunicationIsGroupOrderStatistic) {
  const auto spec = SchemeSpec::cr(5, 1, 2);
  const auto cfg = config(0, 1, 0, 5);
  std::vector<double> times{0.0, 0.9, 0.1, 0.5, 0.3, 0.7};
  const auto out = replay_iteration(spec, cfg, times);
  EXPECT_DOUBLE_EQ(out.completion_time, 0.5);  // third fastest of five
  EXPECT_EQ(std::vector<int>(out.unused.slots(0).begin(), out.unused.slots(0).end()),
            (std::vector<int>{0, 4}));
}

TEST(Simulate, PureQueueing) {
  const auto spec = SchemeSpec::gc(4, 0);
  const std::vector<double> zeros(5, 0.0);
  EXPECT_DOUBLE_EQ(replay_iteration(spec, config(0, 1, 1, 4), zeros).completion_time, 4.0);
}

TEST(Simulate, ContentionServesEarliestThenSlot) {
  const auto spec = SchemeSpec::umw(3);
  const std::vector<double> times{0.0, 1.0, 0.0, 0.0};
  const auto out = replay_iteration(spec, config(0, 1, 2, 3), times, true);
  std::vector<std::pair<double, NodeId>> receives;
  for (const auto& e : out.events)
    if (e.type == EventType::kReceive) receives.emplace_back(e.start, e.peer);
  ASSERT_EQ(receives.size(), 3u);
  EXPECT_EQ(receives[0], (std::pair<double, NodeId>{0.0, {1, 2}}));
  EXPECT_EQ(receives[1], (std::pair<double, NodeId>{2.0, {1, 3}}));
  EXPECT_EQ(receives[2], (std::pair<double, NodeId>{4.0, {1, 1}}));
  EXPECT_DOUBLE_EQ(out.completion_time, 6.0);
}

TEST(Simulate, InternalNodeWaitsForItsOwnCompute) {
  // (2,2) tree, s = 0: (1,1) has its leaves in by 2 but computes until 10;
  // the master takes (1,2) at 2..3 and (1,1) at 10..11.
  const auto spec = SchemeSpec::cr(2, 2, 0);
  const std::vector<double> times{0.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  const auto out = replay_iteration(spec, config(0, 1, 1, 6), times);
  EXPECT_DOUBLE_EQ(out.completion_time, 11.0);
}

TEST(Simulate, RarBarrier) {
  const auto spec = SchemeSpec::rar(4);
  const std::vector<double> times{0.0, 1.0, 3.0, 2.0, 0.5};
  EXPECT_DOUBLE_EQ(replay_iteration(spec, config(0, 1, 2, 4), times).completion_time,
                   3.0 + 2.0 * 3 * 0.5);
}

TEST(Simulate, SgdWaitsForQuorumOnly) {
  const auto spec = SchemeSpec::sgd(4, 2);
  const std::vector<double> times{0.0, 9.0, 1.0, 8.0, 2.0};
  const auto out = replay_iteration(spec, config(0, 1, 0.5, 4), times);
  EXPECT_DOUBLE_EQ(out.completion_time, 2.5);
  EXPECT_EQ(out.unused.slots(0).size(), 2u);
}

TEST(Simulate, FailedNodesAndUnreachableQuorum) {
  const auto spec = SchemeSpec::cr(3, 2, 1);
  std::mt19937_64 rng(1);
  const std::vector<NodeId> one{{2, 1}};
  EXPECT_TRUE(std::isfinite(simulate_iteration(spec, config(0, 1, 0.1, 15), rng, false, one)
                                .completion_time));
  const std::vector<NodeId> two{{2, 1}, {2, 2}};
  const auto out = simulate_iteration(spec, config(0, 1, 0.1, 15), rng, false, two);
  EXPECT_TRUE(std::isfinite(out.completion_time));  // (1,1) becomes a straggler itself
  EXPECT_TRUE(out.unused.is_straggler(0, 0));
  const std::vector<NodeId> layer1{{1, 1}, {1, 2}};
  EXPECT_EQ(simulate_iteration(spec, config(0, 1, 0.1, 15), rng, false, layer1).completion_time,
            kNeverFinishes);
}

TEST(Simulate, PipeliningLowerBound) {
  // Per trial, replay the same compute times with and without communication.
  // The master serves n - s messages one at a time, none before the earliest
  // layer-1 node is ready, and the last consumed one costs a full t_c.
  const auto spec = SchemeSpec::cr(3, 2, 1);
  const double tc = 0.05;
  const auto with = config(0.01, 1, tc, 15);
  const auto without = config(0.01, 1, 0, 15);
  const RegularTree tree = spec.topology();
  double sum_with = 0.0, sum_without = 0.0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(t));
    std::vector<double> times(tree.node_count(), 0.0);
    for (std::size_t off = 1; off < times.size(); ++off) times[off] = sample_comp_time(with, 4.0, rng);
    const double t1 = replay_iteration(spec, with, times).completion_time;
    const double t0 = replay_iteration(spec, without, times).completion_time;
    double earliest = kNeverFinishes;
    for (NodeId node : tree.children(kMaster)) {
      std::vector<double> leaves;
      for (NodeId leaf : tree.children(node)) leaves.push_back(times[tree.offset(leaf)]);
      std::sort(leaves.begin(), leaves.end());
      earliest = std::min(earliest, std::max(times[tree.offset(node)], leaves[1]));
    }
    ASSERT_GE(t1, t0 + tc - 1e-12);
    ASSERT_GE(t1, earliest + 2 * tc - 1e-12);
    sum_with += t1;
    sum_without += t0;
  }
  EXPECT_GE(sum_with / trials, sum_without / trials + tc);
}

TEST(Property, EventCausalityAndSinglePort) {
  const auto spec = SchemeSpec::cr(4, 3, 1);
  const auto cfg = config(0.01, 2, 0.05, granularity(4, 3, 1));
  const RegularTree tree = spec.topology();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    const auto out = simulate_iteration(spec, cfg, rng, true);
    std::map<NodeId, double> compute_done;
    std::map<NodeId, std::vector<std::pair<double, double>>> receives;
    std::map<NodeId, double> send_start;
    for (const auto& e : out.events) {
      EXPECT_LE(e.start, e.end);
      if (e.type == EventType::kCompute) compute_done[e.node] = e.end;
      if (e.type == EventType::kReceive) receives[e.node].emplace_back(e.start, e.end);
      if (e.type == EventType::kSend) send_start[e.node] = e.start;
    }
    for (auto& [parent, spans] : receives) {
      std::sort(spans.begin(), spans.end());
      for (std::size_t k = 1; k < spans.size(); ++k) EXPECT_GE(spans[k].first, spans[k - 1].second);
      EXPECT_EQ(static_cast<int>(spans.size()), spec.quorum());
    }
    for (const auto& [node, start] : send_start) {
      EXPECT_GE(start, compute_done[node]);
      if (!tree.is_leaf(node)) {
        ASSERT_TRUE(receives.count(node));
        EXPECT_GE(start, receives[node].back().second);
      }
    }
  }
}

TEST(Property, SingleLayerCrMatchesGcWithoutComm) {
  const auto cfg = config(0.1, 1, 0, 60, 4);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 a(seed), b(seed);
    EXPECT_EQ(simulate_iteration(SchemeSpec::cr(6, 1, 2), cfg, a).completion_time,
              simulate_iteration(SchemeSpec::gc(6, 2), cfg, b).completion_time);
  }
}

TEST(Property, Reproducible) {
  const auto spec = SchemeSpec::cr(3, 2, 1);
  const auto cfg = config(0.1, 1, 0.1, 15);
  std::mt19937_64 a(9), b(9);
  const auto x = simulate_iteration(spec, cfg, a, true);
  const auto y = simulate_iteration(spec, cfg, b, true);
  EXPECT_EQ(x.completion_time, y.completion_time);
  EXPECT_EQ(x.unused, y.unused);
  ASSERT_EQ(x.events.size(), y.events.size());
  const auto m1 = mc_expected_latency(spec, cfg, 500, 1);
  const auto m4 = mc_expected_latency(spec, cfg, 500, 4);
  EXPECT_EQ(m1.mean, m4.mean);
  EXPECT_EQ(m1.half_width_95, m4.half_width_95);
}

TEST(Bounds, FreeCommunicationCollapses) {
  const auto b = cr_bounds(config(0.3, 2, 0, 15), 3, 2, 1);
  const double rd = 4.0;
  EXPECT_DOUBLE_EQ(b.lower, b.upper);
  EXPECT_NEAR(b.lower, rd / 2 * std::log(3.0) + 0.3 * rd, 1e-12);
}

TEST(Bounds, LargeTree) {
  const auto cfg = config(0.01, 1, 0.001, 12100.0 * 2);
  const auto b = cr_bounds(cfg, 100, 2, 20);
  EXPECT_TRUE(std::isfinite(b.lower));
  EXPECT_LT(b.lower, b.upper);
  EXPECT_THROW(cr_bounds(cfg, 100, 2, 0), std::invalid_argument);
}

TEST(Bounds, GapGrowsLinearlyInFanout) {
  // alpha fixed at 1/4, L = 3: upper - lower = (n L - n (1 - alpha) - L + 1) t_c.
  for (int n : {4, 8, 16, 32}) {
    const auto b = cr_bounds(config(0, 1, 0.01, 1000), n, 3, n / 4);
    EXPECT_NEAR(b.upper - b.lower, (n * 3 - n * 0.75 - 2) * 0.01, 1e-12);
  }
}

TEST(MonteCarlo, DeterministicLimit) {
  const auto est = mc_expected_latency(SchemeSpec::gc(4, 1), config(0.5, 1e9, 0, 8), 200);
  EXPECT_NEAR(est.mean, 0.5 * 4, 1e-6);
  EXPECT_THROW(mc_expected_latency(SchemeSpec::gc(4, 1), config(0.5, 1, 0, 8), 0),
               std::invalid_argument);
}

TEST(MonteCarlo, CodedReduceBeatsGradientCodingAtScale) {
  const auto cfg = config(0.001, 260, 0.01, 1092, 2);
  const auto cr = mc_expected_latency(SchemeSpec::cr(12, 2, 1), cfg, 2000);
  const auto gc = mc_expected_latency(SchemeSpec::gc(156, 13), cfg, 2000);
  EXPECT_LT(cr.mean + cr.half_width_95, gc.mean - gc.half_width_95);
}

TEST(MonteCarlo, HeavyTailHurtsUmwMoreThanGc) {
  // Tails scale with the load, so coding only pays off when the redundancy
  // is cheap: with N = 3, S = 1 the means are (d/mu)(H3/3) vs (d/mu)(2/3)(H3 - H1).
  const auto cfg = config(0.0, 0.05, 0.001, 30, 3);
  const auto umw = mc_expected_latency(SchemeSpec::umw(3), cfg, 20000);
  const auto gc = mc_expected_latency(SchemeSpec::gc(3, 1), cfg, 20000);
  EXPECT_GT(umw.mean - umw.half_width_95, gc.mean + gc.half_width_95);
}

TEST(EventLog, CsvRoundTrip) {
  std::mt19937_64 rng(4);
  const auto out = simulate_iteration(SchemeSpec::cr(3, 2, 1), config(0.1, 1, 0.1, 15), rng, true);
  std::stringstream ss;
  write_event_log_csv(ss, out);
  EXPECT_EQ(ss.str().substr(0, 29), "node,event_type,t_start,t_end");
  const auto back = read_event_log_csv(ss);
  ASSERT_EQ(back.size(), out.events.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].node, out.events[k].node);
    EXPECT_EQ(back[k].type, out.events[k].type);
    EXPECT_EQ(back[k].start, out.events[k].start);
    EXPECT_EQ(back[k].end, out.events[k].end);
  }
}

}  // namespace
}  // namespace codedreduce
