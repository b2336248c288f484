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

#include "codedreduce/codes.hpp"

#include <iterator>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

namespace codedreduce {
namespace {

double ones_residual(const DecodeRow& row, const EncodingMatrix& code) {
  return ((row.coefficients * code.matrix()).array() - 1.0).abs().maxCoeff();
}

TEST(BuildEncoding, NoStragglersIsIdentity) {
  const auto code = build_encoding(3, 0, 42);
  EXPECT_TRUE(code.matrix().isIdentity());
  EXPECT_EQ(code.stragglers(), 0);
}

TEST(BuildEncoding, CyclicSupport) {
  const auto code = build_encoding(3, 1, 7);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const bool in_support = j == i || j == (i + 1) % 3;
      EXPECT_EQ(code(i, j) != 0.0, in_support) << i << "," << j;
    }
  EXPECT_TRUE(validate_code(code).valid);
}

TEST(BuildEncoding, ColumnsHaveSPlusOneNonzeros) {
  for (auto [n, s] : {std::pair{5, 2}, {8, 3}, {12, 3}, {6, 5}}) {
    const auto code = build_encoding(n, s, 3);
    for (int j = 0; j < n; ++j) EXPECT_EQ((code.matrix().col(j).array() != 0.0).count(), s + 1);
  }
}

TEST(BuildEncoding, ValidForTwelveThree) {
  const auto code = build_encoding(12, 3, 1);
  const auto report = validate_code(code);
  EXPECT_TRUE(report.valid);
  EXPECT_EQ(report.sets_checked, 220u);
  EXPECT_LE(report.max_residual, 1e-8);
}

TEST(BuildEncoding, Deterministic) {
  EXPECT_EQ(build_encoding(6, 2, 9).matrix(), build_encoding(6, 2, 9).matrix());
  EXPECT_NE(build_encoding(6, 2, 9).matrix(), build_encoding(6, 2, 10).matrix());
}

TEST(BuildEncoding, RejectsBadParameters) {
  EXPECT_THROW(build_encoding(3, 3, 0), std::invalid_argument);
  EXPECT_THROW(build_encoding(3, -1, 0), std::invalid_argument);
  EXPECT_THROW(build_encoding(0, 0, 0), std::invalid_argument);
}

TEST(ExampleCode, AcceptedByValidation) {
  const auto code = three_worker_example_code();
  EXPECT_TRUE(validate_code(code).valid);
  EXPECT_EQ(validate_code(code).sets_checked, 3u);
}

TEST(DecodeRow, ExampleRows) {
  const auto code = three_worker_example_code();
  const std::vector<std::pair<std::vector<int>, Eigen::RowVector3d>> cases{
      {{1, 2}, {0, 1, 2}}, {{0, 2}, {1, 0, 1}}, {{0, 1}, {2, -1, 0}}};
  for (const auto& [survivors, expected] : cases) {
    const auto row = decode_row(code, survivors);
    EXPECT_LE((row.coefficients - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(row.residual, 1e-12);
  }
}

TEST(DecodeRow, IdentityAllSurvivors) {
  const EncodingMatrix code(Eigen::Matrix3d::Identity(), 0);
  const std::vector<int> all{0, 1, 2};
  EXPECT_TRUE(decode_row(code, all).coefficients.isApprox(Eigen::RowVector3d::Ones()));
}

TEST(DecodeRow, ZeroOutsideSurvivorsAndSatisfiesOnes) {
  const auto code = build_encoding(7, 2, 5);
  const std::vector<int> survivors{0, 2, 3, 5, 6};
  const auto row = decode_row(code, survivors);
  EXPECT_EQ(row.coefficients[1], 0.0);
  EXPECT_EQ(row.coefficients[4], 0.0);
  EXPECT_LE(ones_residual(row, code), 1e-8);
}

TEST(DecodeRow, ExtraSurvivorsStillDecode) {
  const auto code = three_worker_example_code();
  const std::vector<int> all{0, 1, 2};
  EXPECT_LE(ones_residual(decode_row(code, all), code), 1e-9);
}

TEST(DecodeRow, TooFewSurvivors) {
  const auto code = three_worker_example_code();
  const std::vector<int> one{1};
  EXPECT_THROW(decode_row(code, one), std::invalid_argument);
}

TEST(DecodeRow, InvalidCodeReportsSurvivorSet) {
  const EncodingMatrix claimed(Eigen::Matrix3d::Identity(), 1);
  const std::vector<int> survivors{1, 2};
  try {
    decode_row(claimed, survivors);
    FAIL() << "expected CodeInvalidError";
  } catch (const CodeInvalidError& e) {
    EXPECT_EQ(e.survivors(), survivors);
    EXPECT_GT(e.residual(), 1e-8);
  }
}

TEST(ValidateCode, IdentityClaimingOneStragglerFails) {
  const EncodingMatrix claimed(Eigen::Matrix3d::Identity(), 1);
  const auto report = validate_code(claimed);
  EXPECT_FALSE(report.valid);
  EXPECT_FALSE(report.first_failure.empty());
}

TEST(DecodeRow, Deterministic) {
  const auto code = build_encoding(9, 4, 2);
  const std::vector<int> f{0, 1, 4, 6, 8};
  EXPECT_EQ(decode_row(code, f).coefficients, decode_row(code, f).coefficients);
}

TEST(Property, EveryMinimalSurvivorSetDecodes) {
  for (int n = 2; n <= 9; ++n)
    for (int s = 1; s < n && s <= 4; ++s) {
      const auto code = build_encoding(n, s, static_cast<std::uint64_t>(n * 100 + s));
      std::vector<bool> mask;
      for (int j = 0; j < n; ++j) mask.push_back(j < n - s);
      do {
        std::vector<int> f;
        for (int j = 0; j < n; ++j)
          if (mask[j]) f.push_back(j);
        EXPECT_LE(ones_residual(decode_row(code, f), code), 1e-8) << n << "," << s;
      } while (std::prev_permutation(mask.begin(), mask.end()));
    }
}

TEST(DecodeRow, BoundIsToleranceForSmallCodes) {
  const auto code = build_encoding(8, 3, 9);
  const auto row = decode_row(code, std::vector<int>{0, 2, 3, 5, 7});
  EXPECT_EQ(row.bound, kDecodeTolerance);
  EXPECT_LE(row.residual, row.bound);
}

TEST(ValidateCodeSampled, AgreesWithExhaustiveOnSmallCode) {
  const auto code = build_encoding(10, 3, 4);
  const auto sampled = validate_code_sampled(code, 300, 8);
  EXPECT_TRUE(sampled.valid);
  EXPECT_EQ(sampled.sets_checked, 300u);
  EXPECT_LE(sampled.max_residual, validate_code(code).max_residual);
}

TEST(ValidateCodeSampled, CatchesInvalidCode) {
  const EncodingMatrix fake(Eigen::MatrixXd::Identity(6, 6), 2);
  const auto result = validate_code_sampled(fake, 50, 1);
  EXPECT_FALSE(result.valid);
  EXPECT_EQ(result.sets_checked, 1u);  // the first cyclic window already fails
  EXPECT_EQ(result.first_failure, (std::vector<int>{2, 3, 4, 5}));
}

TEST(BuildEncoding, WideFlatCode) {
  // 156 workers, 13 stragglers: far too many survivor sets to enumerate.
  const auto code = build_encoding(156, 13, 7);
  std::mt19937_64 rng(3);
  std::vector<int> all(156);
  std::iota(all.begin(), all.end(), 0);
  for (int k = 0; k < 20; ++k) {
    std::vector<int> f;
    std::sample(all.begin(), all.end(), std::back_inserter(f), 143, rng);
    const auto row = decode_row(code, f);
    EXPECT_LE(row.residual, row.bound);
    EXPECT_LE(row.bound, 1e-6);
  }
}

TEST(MatrixCsv, RoundTripIsExact) {
  const auto code = build_encoding(5, 2, 4);
  std::stringstream ss;
  write_matrix_csv(ss, code.matrix());
  EXPECT_EQ(read_matrix_csv(ss), code.matrix());
}

}  // namespace
}  // namespace codedreduce
