// Copyright 2026 The BiasLab Authors.
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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace biaslab {

// Paired outcomes of models A and B over the same examples.
//   n00: both correct        n01: A correct, B wrong
//   n10: A wrong, B correct  n11: both wrong
struct ContingencyTable {
  std::size_t n00 = 0;
  std::size_t n01 = 0;
  std::size_t n10 = 0;
  std::size_t n11 = 0;

  std::size_t total() const { return n00 + n01 + n10 + n11; }
  bool operator==(const ContingencyTable&) const = default;
};

ContingencyTable build_contingency(std::span<const int> preds_a,
                                   std::span<const int> preds_b,
                                   std::span<const int> gold);

struct McNemarResult {
  double chi2 = 0.0;
  double p_value = 1.0;
  bool correction_applied = false;
  std::size_t n01 = 0;
  std::size_t n10 = 0;

  nlohmann::json to_json() const;
};

// chi2 = (max(|n01 - n10| - c, 0))^2 / (n01 + n10) with c = 1 under continuity
// correction; p from the chi-square(1) survival function. Throws when there
// are no discordant pairs.
McNemarResult mcnemar(const ContingencyTable& table, bool continuity_correction);

struct FiveTwoResult {
  double t = 0.0;
  double p_value = 1.0;
  // differences[i] = {p_i^(1), p_i^(2)}: metric(A) - metric(B) on the two
  // folds of replication i.
  std::array<std::array<double, 2>, 5> differences{};
  // s_i^2 per replication.
  std::array<double, 5> variances{};

  // theta in replication-major order (10 values).
  std::vector<double> theta() const;
  nlohmann::json to_json() const;
};

// Dietterich's 5x2cv paired t-test from per-fold metric differences.
// Degenerate variance: t = 0, p = 1 when the numerator is 0 too, otherwise
// t = +/-inf and p = 0.
FiveTwoResult five_by_two_ttest(
    const std::array<std::array<double, 2>, 5>& differences);

// Same test from raw scores: scores[i][j] = {metric of A, metric of B} on fold
// j of replication i. Throws unless the shape is exactly 5 x 2.
FiveTwoResult five_by_two_ttest(
    const std::vector<std::vector<std::array<double, 2>>>& scores);

// ---------------------------------------------------------------------------
// Special functions

// Complementary error function, absolute error below 1e-12.
double erfc(double x);

// Regularized incomplete beta I_x(a, b) by continued fraction, switching to
// 1 - I_{1-x}(b, a) past the mean.
double reg_inc_beta(double x, double a, double b);

// Upper tail of chi-square; only dof = 1 is supported: erfc(sqrt(x / 2)).
double chi2_sf(double x, int dof);

// Two-tailed Student-t p-value: I_{dof/(dof+t^2)}(dof/2, 1/2).
double t_sf_two_tailed(double t, int dof);

}  // namespace biaslab
