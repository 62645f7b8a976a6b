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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "biaslab/error.hpp"
#include "biaslab/random.hpp"
#include "biaslab/stattests.hpp"

using namespace biaslab;

namespace {

// erf by its Maclaurin series in long double.
long double erf_series(long double x) {
  long double sum = 0, term = x;
  for (int n = 0; n < 200; ++n) {
    sum += term / (2 * n + 1);
    term *= -x * x / (n + 1);
  }
  return 2 * sum / std::sqrt(std::numbers::pi_v<long double>);
}

std::array<std::array<double, 2>, 5> constant_diffs(double a, double b) {
  std::array<std::array<double, 2>, 5> d{};
  for (auto& r : d) r = {a, b};
  return d;
}

}  // namespace

TEST_CASE("erfc against series and library oracles") {
  CHECK(biaslab::erfc(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(biaslab::erfc(1.0) - static_cast<double>(1.0L - erf_series(1.0L))) < 1e-12);
  CHECK(std::abs(biaslab::erfc(1.0) - 0.157299207050285) < 1e-9);
  for (double x = -6.0; x <= 6.0; x += 0.125) {
    CHECK(std::abs(biaslab::erfc(x) - std::erfc(x)) < 1e-12);
    CHECK(std::abs(biaslab::erfc(-x) - (2.0 - biaslab::erfc(x))) < 1e-12);
  }
}

TEST_CASE("regularized incomplete beta identities") {
  for (double x : {0.0, 0.25, 1.0}) CHECK(std::abs(reg_inc_beta(x, 1, 1) - x) < 1e-14);
  for (double a : {0.5, 2.0, 5.0}) CHECK(std::abs(reg_inc_beta(0.5, a, a) - 0.5) < 1e-12);
  for (double x = 0.0; x <= 1.0; x += 0.04) {
    const double poly = 6 * x * x - 8 * x * x * x + 3 * x * x * x * x;
    CHECK(std::abs(reg_inc_beta(x, 2, 3) - poly) < 1e-10);
  }
  CHECK(std::abs(reg_inc_beta(0.36, 2, 3) - 0.45474048) < 1e-12);
  double prev = -1.0;
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    const double v = reg_inc_beta(x, 2.5, 0.5);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(reg_inc_beta(1.5, 1, 1), ValidationError);
  CHECK_THROWS_AS(reg_inc_beta(0.5, 0, 1), ValidationError);
}

TEST_CASE("chi-square survival at critical values") {
  CHECK(chi2_sf(0.0, 1) == 1.0);
  CHECK(std::abs(chi2_sf(3.841, 1) - 0.05) < 5e-4);
  CHECK(std::abs(chi2_sf(6.635, 1) - 0.01) < 5e-4);
  CHECK_THROWS_AS(chi2_sf(1.0, 2), ValidationError);
  double prev = 2.0;
  for (double x = 0.0; x < 40.0; x += 0.5) {
    const double p = chi2_sf(x, 1);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("two-tailed t survival against closed forms") {
  CHECK(t_sf_two_tailed(0.0, 5) == 1.0);
  CHECK(std::abs(t_sf_two_tailed(2.571, 5) - 0.05) < 5e-4);
  CHECK(std::abs(t_sf_two_tailed(4.032, 5) - 0.01) < 5e-4);
  for (double t = -20.0; t <= 20.0; t += 0.37) {
    const double cauchy = 1.0 - 2.0 / std::numbers::pi * std::atan(std::abs(t));
    const double dof2 = 1.0 - std::abs(t) / std::sqrt(2.0 + t * t);
    CHECK(std::abs(t_sf_two_tailed(t, 1) - cauchy) < 1e-10);
    CHECK(std::abs(t_sf_two_tailed(t, 2) - dof2) < 1e-10);
  }
  double prev = 2.0;
  for (double t = 0.0; t < 30.0; t += 0.5) {
    const double p = t_sf_two_tailed(t, 5);
    CHECK(p < prev);
    prev = p;
  }
  CHECK_THROWS_AS(t_sf_two_tailed(1.0, 0), ValidationError);
}

TEST_CASE("contingency table tallies") {
  const std::vector<int> gold{1, 0, 1, 1, 0, 0};
  const std::vector<int> a{1, 0, 0, 1, 1, 0};
  const std::vector<int> b{1, 1, 1, 0, 1, 0};
  CHECK(build_contingency(a, b, gold) == ContingencyTable{2, 2, 1, 1});
  const auto same = build_contingency(a, a, gold);
  CHECK(same.n01 + same.n10 == 0);
  std::vector<int> complement(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) complement[i] = 1 - gold[i];
  CHECK(build_contingency(gold, complement, gold) == ContingencyTable{0, 6, 0, 0});
  CHECK_THROWS_AS(build_contingency(a, std::vector<int>{1}, gold), ValidationError);
}

TEST_CASE("McNemar statistic hand values") {
  const auto sym = mcnemar({0, 7, 7, 0}, false);
  CHECK(sym.chi2 == 0.0);
  CHECK(sym.p_value == 1.0);
  CHECK(mcnemar({10, 15, 5, 3}, false).chi2 == 5.0);
  const auto corrected = mcnemar({10, 15, 5, 3}, true);
  CHECK(std::abs(corrected.chi2 - 4.05) < 1e-15);
  CHECK(std::abs(corrected.p_value - 0.0441) < 1e-4);
  CHECK(corrected.correction_applied);
  CHECK(mcnemar({0, 1, 1, 0}, true).chi2 == 0.0);
  CHECK_THROWS_WITH_AS(mcnemar({5, 0, 0, 5}, true),
                       "McNemar's test undefined: no discordant pairs", ValidationError);

  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    ContingencyTable t{rng.below(50), rng.below(50), 1 + rng.below(50), rng.below(50)};
    const double d = std::abs(static_cast<double>(t.n01) - static_cast<double>(t.n10));
    const double n = static_cast<double>(t.n01 + t.n10);
    CHECK(mcnemar(t, false).chi2 == d * d / n);
    const double c = std::max(d - 1.0, 0.0);
    CHECK(mcnemar(t, true).chi2 == c * c / n);
  }
}

TEST_CASE("5x2 paired t-test") {
  const auto r = five_by_two_ttest(constant_diffs(0.1, 0.2));
  for (double s2 : r.variances) CHECK(std::abs(s2 - 0.005) < 1e-15);
  CHECK(std::abs(r.t - 1.4142135623730951) < 1e-12);
  CHECK(std::abs(r.p_value - t_sf_two_tailed(r.t, 5)) < 1e-15);
  CHECK(std::abs(r.p_value - 0.216) < 1e-3);
  CHECK(r.theta().size() == 10);

  const auto mirrored = five_by_two_ttest(constant_diffs(-0.1, -0.2));
  CHECK(mirrored.t == -r.t);
  CHECK(mirrored.p_value == r.p_value);

  const auto zero = five_by_two_ttest(constant_diffs(0.0, 0.0));
  CHECK(zero.t == 0.0);
  CHECK(zero.p_value == 1.0);
  const auto pos = five_by_two_ttest(constant_diffs(0.1, 0.1));
  CHECK(pos.t == std::numeric_limits<double>::infinity());
  CHECK(pos.p_value == 0.0);
  CHECK(five_by_two_ttest(constant_diffs(-0.1, -0.1)).t ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("5x2 test from raw scores checks its shape") {
  std::vector<std::vector<std::array<double, 2>>> scores(5, {{0.9, 0.8}, {0.7, 0.5}});
  const auto r = five_by_two_ttest(scores);
  CHECK(std::abs(r.differences[0][0] - 0.1) < 1e-15);
  CHECK(std::abs(r.differences[4][1] - 0.2) < 1e-15);
  scores.pop_back();
  CHECK_THROWS_AS(five_by_two_ttest(scores), ValidationError);
  scores.push_back({{0.9, 0.8}});
  CHECK_THROWS_AS(five_by_two_ttest(scores), ValidationError);
}
