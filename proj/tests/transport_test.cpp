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

#include "codedreduce/transport.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "codedreduce/ml.hpp"

namespace codedreduce::transport {
namespace {

class TransportTest : public ::testing::Test {
 protected:
  void SetUp() override {
    options_.run_dir = std::filesystem::path(::testing::TempDir()) /
                       ("crd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(options_.run_dir);
    options_.deadline = std::chrono::milliseconds(10000);
    options_.grace = std::chrono::milliseconds(3000);
    theta_ = ModelVec::LinSpaced(6, -1.0, 1.0);
    expected_ = cr_execute(assignment_, StragglerPattern(assignment_.tree()), oracle_, theta_);
  }

  double rel_err(const GradientVec& g) const {
    if (g.size() != expected_.size()) return 1e300;
    return (g - expected_).cwiseAbs().maxCoeff() / expected_.cwiseAbs().maxCoeff();
  }

  SyntheticData synth_ = generate_synthetic(30, 6, 17);
  Assignment assignment_ = cr_allocate(build_tree(3, 2), 1, 30, 17);
  GradientOracle oracle_ = make_oracle(LossKind::kLinear, synth_.data);
  ModelVec theta_;
  GradientVec expected_;
  TransportOptions options_;
};

TEST_F(TransportTest, NoFailuresMatchesEngine) {
  const auto report = orchestrate(assignment_, oracle_, theta_, {}, options_);
  ASSERT_TRUE(report.recovered) << report.nodes.front().error;
  EXPECT_LE(rel_err(report.gradient), 1e-9);
  EXPECT_EQ(report.nodes.size(), 13u);
  // A late child may find its parent already done; that is not a failure.
  for (const auto& node : report.nodes) {
    EXPECT_FALSE(node.aborted_parent.has_value()) << node.node;
    if (!assignment_.tree().is_leaf(node.node)) EXPECT_TRUE(node.ok) << node.node << ": " << node.error;
  }
  const auto realized = report.realized_pattern(assignment_.tree());
  EXPECT_EQ(realized.max_per_parent(), 1);
  EXPECT_EQ(realized.total(), 4u);
}

TEST_F(TransportTest, OneCrashPerParentStillRecovers) {
  FailurePlan plan;
  for (NodeId node : {NodeId{1, 3}, NodeId{2, 2}, NodeId{2, 4}, NodeId{2, 9}})
    plan[node] = {Failure::kCrashBeforeCompute, {}};
  const auto report = orchestrate(assignment_, oracle_, theta_, plan, options_);
  ASSERT_TRUE(report.recovered);
  EXPECT_LE(rel_err(report.gradient), 1e-9);
  EXPECT_EQ(report.nodes.front().consumed, (std::vector<int>{0, 1}));
  EXPECT_EQ(report.nodes[assignment_.tree().offset({1, 1})].consumed, (std::vector<int>{0, 2}));
  // The consumed sets form an admissible pattern the engine agrees with.
  auto realized = report.realized_pattern(assignment_.tree());
  realized.set(assignment_.tree().offset({1, 3}), {});
  EXPECT_LE(rel_err(cr_execute(assignment_, realized, oracle_, theta_)), 1e-9);
}

TEST_F(TransportTest, TwoCrashesUnderMasterAbortNamingMaster) {
  FailurePlan plan{{{1, 1}, {Failure::kCrashBeforeCompute, {}}},
                   {{1, 2}, {Failure::kCrashBeforeCompute, {}}}};
  const auto report = orchestrate(assignment_, oracle_, theta_, plan, options_);
  EXPECT_FALSE(report.recovered);
  ASSERT_TRUE(report.aborted_parent.has_value());
  EXPECT_EQ(*report.aborted_parent, kMaster);
  EXPECT_LT(report.elapsed, std::chrono::milliseconds(8000));  // aborted on EOF, not the deadline
}

TEST_F(TransportTest, TwoCrashesUnderInternalNodeNamesIt) {
  FailurePlan plan{{{2, 4}, {Failure::kCrashBeforeCompute, {}}},
                   {{2, 5}, {Failure::kCrashBeforeCompute, {}}}};
  const auto report = orchestrate(assignment_, oracle_, theta_, plan, options_);
  const auto& node = report.nodes[assignment_.tree().offset({1, 2})];
  ASSERT_TRUE(node.aborted_parent.has_value());
  EXPECT_EQ(*node.aborted_parent, (NodeId{1, 2}));
  EXPECT_EQ(*report.aborted_parent, (NodeId{1, 2}));
  // (1,2) then looks like a single straggler to the master.
  ASSERT_TRUE(report.recovered);
  EXPECT_LE(rel_err(report.gradient), 1e-9);
}

TEST_F(TransportTest, NeverStartedChildrenTimeOutAtDeadline) {
  // Silent children leave no EOF to react to, so the master waits out its deadline.
  options_.deadline = std::chrono::milliseconds(1500);
  FailurePlan plan{{{1, 1}, {Failure::kNeverStart, {}}}, {{1, 2}, {Failure::kNeverStart, {}}}};
  const auto report = orchestrate(assignment_, oracle_, theta_, plan, options_);
  EXPECT_FALSE(report.recovered);
  const auto& master = report.nodes.front();
  ASSERT_TRUE(master.aborted_parent.has_value()) << master.error;
  EXPECT_EQ(*master.aborted_parent, kMaster);
  EXPECT_NE(master.error.find("timed out"), std::string::npos) << master.error;
  EXPECT_GE(report.elapsed, std::chrono::milliseconds(1500));
  EXPECT_EQ(report.nodes[assignment_.tree().offset({1, 1})].error, "never started");
}

TEST_F(TransportTest, KillAfterDelay) {
  FailurePlan plan{{{2, 1}, {Failure::kKillAfter, std::chrono::milliseconds(0)}}};
  const auto report = orchestrate(assignment_, oracle_, theta_, plan, options_);
  ASSERT_TRUE(report.recovered);
  EXPECT_LE(rel_err(report.gradient), 1e-9);
}

TEST_F(TransportTest, MasterCannotFail) {
  FailurePlan plan{{kMaster, {Failure::kCrashBeforeCompute, {}}}};
  EXPECT_THROW(orchestrate(assignment_, oracle_, theta_, plan, options_), std::invalid_argument);
}

TEST(Endpoints, RoundTrip) {
  const std::vector<Endpoint> endpoints{{kMaster, "127.0.0.1", 4000}, {{1, 2}, "127.0.0.1", 65535}};
  std::stringstream ss;
  write_endpoints(ss, endpoints);
  const auto back = read_endpoints(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].node, (NodeId{1, 2}));
  EXPECT_EQ(back[1].port, 65535);
  std::stringstream bad("1 2 127.0.0.1 70000\n");
  EXPECT_THROW(read_endpoints(bad), std::runtime_error);
}

TEST(Reports, RoundTrip) {
  NodeReport report;
  report.node = {1, 3};
  report.error = "parent (1,3) lost 2\nchildren";
  report.aborted_parent = NodeId{1, 3};
  report.consumed = {0, 2};
  std::stringstream ss;
  write_node_report(ss, report);
  const auto back = read_node_report(ss, {1, 3});
  EXPECT_FALSE(back.ok);
  EXPECT_EQ(back.aborted_parent, report.aborted_parent);
  EXPECT_EQ(back.consumed, report.consumed);
  EXPECT_EQ(back.error, "parent (1,3) lost 2 children");
}

TEST(Roles, ByLayer) {
  const auto tree = build_tree(3, 2);
  EXPECT_EQ(role_of(tree, kMaster), Role::kMaster);
  EXPECT_EQ(role_of(tree, {1, 2}), Role::kInternal);
  EXPECT_EQ(role_of(tree, {2, 2}), Role::kLeaf);
}

}  // namespace
}  // namespace codedreduce::transport
