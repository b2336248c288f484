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
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace codedreduce {

inline constexpr double kDecodeTolerance = 1e-8;
inline constexpr double kDecodeWarnThreshold = 1e-10;

/// Gradient-coding encoding matrix B (n x n). Row i says which of the n
/// partitions worker i combines, and with which coefficients.
class EncodingMatrix {
 public:
  EncodingMatrix(Eigen::MatrixXd coefficients, int stragglers);

  int workers() const { return static_cast<int>(b_.rows()); }
  int partitions() const { return static_cast<int>(b_.cols()); }
  int stragglers() const { return s_; }
  const Eigen::MatrixXd& matrix() const { return b_; }
  double operator()(int row, int col) const { return b_(row, col); }

 private:
  Eigen::MatrixXd b_;
  int s_;
};

/// Combining row for one survivor set: zero outside `survivors`, and
/// coefficients * B == ones within the decode tolerance.
struct DecodeRow {
  Eigen::RowVectorXd coefficients;
  std::vector<int> survivors;  // 0-based, sorted
  double residual = 0.0;       // infinity-norm of coefficients * B - ones
  double bound = 0.0;          // largest residual decode_row would have accepted
};

class CodeInvalidError : public std::runtime_error {
 public:
  CodeInvalidError(std::vector<int> survivors, double residual);
  const std::vector<int>& survivors() const { return survivors_; }
  double residual() const { return residual_; }

 private:
  std::vector<int> survivors_;
  double residual_;
};

/// Cyclic-support code: row i is supported on columns i..i+s (mod n). Rows
/// are drawn from the null space of a seeded Gaussian s x n matrix H with
/// H * ones = 0, so any n-s rows span a space that contains the ones vector.
/// Each draw is checked on every survivor set when there are at most 200000
/// of them and on a 2000-set sample otherwise.
EncodingMatrix build_encoding(int n, int s, std::uint64_t seed);

/// The 3-worker, 1-straggler code used in the worked example:
/// [[1/2, 1, 0], [0, 1, -1], [1/2, 0, 1]].
EncodingMatrix three_worker_example_code();

/// Minimum-norm a with a_F * B_F = ones, embedded into length n.
/// Throws std::invalid_argument if |F| < n - s, CodeInvalidError if the
/// residual exceeds `tolerance` (or, for codes with very large coefficients,
/// the rounding error of evaluating a_F * B_F, whichever is larger).
DecodeRow decode_row(const EncodingMatrix& code, std::span<const int> survivors,
                     double tolerance = kDecodeTolerance);

struct CodeValidation {
  bool valid = true;
  std::size_t sets_checked = 0;
  double max_residual = 0.0;
  std::vector<int> first_failure;  // empty when valid
};

/// Checks decode_row on every survivor set of size exactly n - s.
CodeValidation validate_code(const EncodingMatrix& code, double tolerance = kDecodeTolerance);

/// Same check on the n cyclic straggler windows plus seeded uniform draws,
/// `sets` survivor sets in total. For codes too large to enumerate.
CodeValidation validate_code_sampled(const EncodingMatrix& code, std::size_t sets,
                                     std::uint64_t seed, double tolerance = kDecodeTolerance);

/// Row-major CSV, 17 significant digits.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(std::istream& is);

}  // namespace codedreduce
