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

#include <algorithm>
#include <atomic>
#include <iostream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "codedreduce/csv.hpp"

namespace codedreduce {

namespace {

constexpr int kMaxDecodeWarnings = 5;

std::string describe_set(const std::vector<int>& set) {
  std::ostringstream os;
  os << '{';
  const std::size_t shown = set.size() > 16 ? 12 : set.size();
  for (std::size_t i = 0; i < shown; ++i) os << (i ? "," : "") << set[i] + 1;
  if (shown < set.size()) os << ",... " << set.size() << " members";
  os << '}';
  return os.str();
}

// Invokes fn on every k-subset of {0..n-1} in lexicographic order; stops
// early when fn returns false.
template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) idx[j] = j;
  while (true) {
    if (!fn(idx)) return;
    int j = k - 1;
    while (j >= 0 && idx[j] == n - k + j) --j;
    if (j < 0) return;
    ++idx[j];
    for (int m = j + 1; m < k; ++m) idx[m] = idx[m - 1] + 1;
  }
}

constexpr int kMaxDraws = 8;
constexpr double kSingularRcond = 1e-12;
constexpr double kRoundingSlack = 64.0;
// build_encoding checks every survivor set up to this many, a sample beyond.
constexpr double kExhaustiveSets = 200000.0;
constexpr std::size_t kSampledSets = 2000;

double choose(int n, int k) {
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

}  // namespace

EncodingMatrix::EncodingMatrix(Eigen::MatrixXd coefficients, int stragglers)
    : b_(std::move(coefficients)), s_(stragglers) {
  if (b_.rows() == 0 || b_.rows() != b_.cols())
    throw std::invalid_argument("encoding matrix must be square and non-empty");
  if (s_ < 0 || s_ >= b_.rows())
    throw std::invalid_argument("encoding matrix needs 0 <= s < n");
}

CodeInvalidError::CodeInvalidError(std::vector<int> survivors, double residual)
    : std::runtime_error("code cannot decode survivor set " + describe_set(survivors) +
                         " (residual " + csv::format_double(residual) + ")"),
      survivors_(std::move(survivors)),
      residual_(residual) {}

EncodingMatrix build_encoding(int n, int s, std::uint64_t seed) {
  if (n < 1 || s < 0 || s >= n) throw std::invalid_argument("build_encoding needs 0 <= s < n");
  if (s == 0) return EncodingMatrix(Eigen::MatrixXd::Identity(n, n), 0);

  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::normal_distribution<double> normal;
    Eigen::MatrixXd h(s, n);
    for (int j = 0; j + 1 < n; ++j)
      for (int r = 0; r < s; ++r) h(r, j) = normal(rng);
    h.col(n - 1) = -h.leftCols(n - 1).rowwise().sum();

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    bool singular = false;
    for (int i = 0; i < n && !singular; ++i) {
      Eigen::MatrixXd rest(s, s);
      for (int t = 1; t <= s; ++t) rest.col(t - 1) = h.col((i + t) % n);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(rest);
      if (lu.rank() < s || lu.rcond() < kSingularRcond) {
        singular = true;
        break;
      }
      const Eigen::VectorXd x = lu.solve(-h.col(i));
      b(i, i) = 1.0;
      for (int t = 1; t <= s; ++t) b(i, (i + t) % n) = x[t - 1];
    }
    if (singular) continue;
    EncodingMatrix code(std::move(b), s);
    const bool exhaustive = choose(n, s) <= kExhaustiveSets;
    const auto check = exhaustive ? validate_code(code)
                                  : validate_code_sampled(code, kSampledSets, seed + attempt);
    if (check.valid) return code;
  }
  throw std::runtime_error("build_encoding: no valid code after " + std::to_string(kMaxDraws) +
                           " draws for n=" + std::to_string(n) + ", s=" + std::to_string(s));
}

EncodingMatrix three_worker_example_code() {
  Eigen::MatrixXd b(3, 3);
  b << 0.5, 1.0, 0.0,
       0.0, 1.0, -1.0,
       0.5, 0.0, 1.0;
  return EncodingMatrix(std::move(b), 1);
}

DecodeRow decode_row(const EncodingMatrix& code, std::span<const int> survivors,
                     double tolerance) {
  const int n = code.workers();
  std::vector<int> f(survivors.begin(), survivors.end());
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  if (!f.empty() && (f.front() < 0 || f.back() >= n))
    throw std::invalid_argument("survivor index outside [0, n)");
  if (static_cast<int>(f.size()) < n - code.stragglers())
    throw std::invalid_argument("decode_row needs at least n - s survivors, got " +
                                std::to_string(f.size()));

  const Eigen::Index k = static_cast<Eigen::Index>(f.size());
  Eigen::MatrixXd rows(k, code.partitions());
  for (Eigen::Index r = 0; r < k; ++r) rows.row(r) = code.matrix().row(f[r]);

  // a * rows = ones  <=>  rows^T * a^T = ones; the complete orthogonal
  // decomposition gives the minimum-norm least-squares solution.
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(code.partitions());
  const Eigen::VectorXd a = rows.transpose().completeOrthogonalDecomposition().solve(ones);
  const double residual = (rows.transpose() * a - ones).cwiseAbs().maxCoeff();
  // Evaluating a * rows in double already carries about eps * |a| * |rows|
  // of rounding; large codes have big coefficients, so never ask for less.
  const double floor = kRoundingSlack * std::numeric_limits<double>::epsilon() *
                       (rows.cwiseAbs().transpose() * a.cwiseAbs()).maxCoeff();
  const double bound = std::max(tolerance, floor);
  if (!(residual <= bound)) throw CodeInvalidError(f, residual);
  if (residual > kDecodeWarnThreshold) {
    // Large flat codes hit this on many sets; report the first few only.
    static std::atomic<int> warned{0};
    const int count = warned.fetch_add(1, std::memory_order_relaxed);
    if (count < kMaxDecodeWarnings)
      std::clog << "warning: decode residual " << residual << " for survivor set "
                << describe_set(f) << '\n';
    else if (count == kMaxDecodeWarnings)
      std::clog << "warning: further decode residual warnings suppressed\n";
  }

  DecodeRow out;
  out.coefficients = Eigen::RowVectorXd::Zero(n);
  for (Eigen::Index r = 0; r < k; ++r) out.coefficients[f[r]] = a[r];
  out.survivors = std::move(f);
  out.residual = residual;
  out.bound = bound;
  return out;
}

CodeValidation validate_code(const EncodingMatrix& code, double tolerance) {
  CodeValidation result;
  const int n = code.workers();
  for_each_subset(n, n - code.stragglers(), [&](const std::vector<int>& set) {
    ++result.sets_checked;
    try {
      const auto row = decode_row(code, set, tolerance);
      result.max_residual = std::max(result.max_residual, row.residual);
      return true;
    } catch (const CodeInvalidError& e) {
      result.valid = false;
      result.max_residual = std::max(result.max_residual, e.residual());
      result.first_failure = e.survivors();
      return false;
    }
  });
  return result;
}

CodeValidation validate_code_sampled(const EncodingMatrix& code, std::size_t sets,
                                     std::uint64_t seed, double tolerance) {
  const int n = code.workers();
  const int s = code.stragglers();
  CodeValidation result;
  auto check = [&](const std::vector<int>& set) {
    ++result.sets_checked;
    try {
      result.max_residual = std::max(result.max_residual, decode_row(code, set, tolerance).residual);
      return true;
    } catch (const CodeInvalidError& e) {
      result.valid = false;
      result.max_residual = std::max(result.max_residual, e.residual());
      result.first_failure = e.survivors();
      return false;
    }
  };
  // Every cyclic window of s stragglers first, then uniform draws.
  std::vector<int> set;
  for (int start = 0; start < n && result.sets_checked < sets; ++start) {
    set.clear();
    for (int j = 0; j < n - s; ++j) set.push_back((start + s + j) % n);
    std::sort(set.begin(), set.end());
    if (!check(set)) return result;
  }
  std::mt19937_64 rng(seed);
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  while (result.sets_checked < sets) {
    set.clear();
    std::sample(all.begin(), all.end(), std::back_inserter(set), n - s, rng);
    if (!check(set)) return result;
  }
  return result;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      os << (c ? "," : "") << csv::format_double(m(r, c));
    os << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& is) {
  const auto table = csv::read_table(is, false);
  if (table.rows.empty()) return {};
  const auto cols = table.rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != cols) throw std::runtime_error("ragged matrix csv");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          csv::parse_double(table.rows[r][c]);
  }
  return m;
}

}  // namespace codedreduce
