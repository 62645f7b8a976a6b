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

#include "biaslab/stattests.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

#include "biaslab/error.hpp"

namespace biaslab {

namespace {

constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

ContingencyTable build_contingency(std::span<const int> preds_a,
                                   std::span<const int> preds_b,
                                   std::span<const int> gold) {
  if (preds_a.size() != gold.size() || preds_b.size() != gold.size()) {
    throw ValidationError("contingency: prediction and gold lengths differ");
  }
  if (gold.empty()) throw ValidationError("contingency: empty input");
  ContingencyTable t;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool a_ok = preds_a[i] == gold[i];
    const bool b_ok = preds_b[i] == gold[i];
    if (a_ok && b_ok) {
      ++t.n00;
    } else if (a_ok) {
      ++t.n01;
    } else if (b_ok) {
      ++t.n10;
    } else {
      ++t.n11;
    }
  }
  return t;
}

nlohmann::json McNemarResult::to_json() const {
  return {{"chi2", chi2}, {"p", p_value}, {"n01", n01}, {"n10", n10},
          {"correction", correction_applied}};
}

McNemarResult mcnemar(const ContingencyTable& table, bool continuity_correction) {
  const std::size_t discordant = table.n01 + table.n10;
  if (discordant == 0) {
    throw ValidationError("McNemar's test undefined: no discordant pairs");
  }
  const double diff = std::abs(static_cast<double>(table.n01) -
                               static_cast<double>(table.n10));
  const double numerator = std::max(diff - (continuity_correction ? 1.0 : 0.0), 0.0);
  McNemarResult r;
  r.chi2 = numerator * numerator / static_cast<double>(discordant);
  r.p_value = chi2_sf(r.chi2, 1);
  r.correction_applied = continuity_correction;
  r.n01 = table.n01;
  r.n10 = table.n10;
  return r;
}

std::vector<double> FiveTwoResult::theta() const {
  std::vector<double> out;
  for (const auto& pair : differences) {
    out.push_back(pair[0]);
    out.push_back(pair[1]);
  }
  return out;
}

nlohmann::json FiveTwoResult::to_json() const {
  auto finite_or_string = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  return {{"t", finite_or_string(t)},
          {"p", p_value},
          {"theta", theta()},
          {"variances", std::vector<double>(variances.begin(), variances.end())}};
}

FiveTwoResult five_by_two_ttest(
    const std::array<std::array<double, 2>, 5>& differences) {
  FiveTwoResult r;
  r.differences = differences;
  double sum_var = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& [p1, p2] = differences[i];
    if (!std::isfinite(p1) || !std::isfinite(p2)) {
      throw ValidationError("5x2 test: non-finite fold difference");
    }
    const double mean = 0.5 * (p1 + p2);
    r.variances[i] = (p1 - mean) * (p1 - mean) + (p2 - mean) * (p2 - mean);
    sum_var += r.variances[i];
  }
  const double numerator = differences[0][0];
  if (sum_var == 0.0) {
    if (numerator == 0.0) {
      r.t = 0.0;
      r.p_value = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), numerator);
      r.p_value = 0.0;
    }
    return r;
  }
  r.t = numerator / std::sqrt(sum_var / 5.0);
  r.p_value = t_sf_two_tailed(r.t, 5);
  return r;
}

FiveTwoResult five_by_two_ttest(
    const std::vector<std::vector<std::array<double, 2>>>& scores) {
  if (scores.size() != 5) {
    throw ValidationError("5x2 test: expected 5 replications, got " +
                          std::to_string(scores.size()));
  }
  std::array<std::array<double, 2>, 5> diffs{};
  for (std::size_t i = 0; i < 5; ++i) {
    if (scores[i].size() != 2) {
      throw ValidationError("5x2 test: replication " + std::to_string(i) +
                            " has " + std::to_string(scores[i].size()) +
                            " folds, expected 2");
    }
    for (std::size_t j = 0; j < 2; ++j) diffs[i][j] = scores[i][j][0] - scores[i][j][1];
  }
  return five_by_two_ttest(diffs);
}

double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x < 3.0) {
    // erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1));
    // every term is positive so there is no cancellation.
    double term = x;
    double sum = x;
    const double x2 = x * x;
    for (int n = 1; n < 500; ++n) {
      term *= 2.0 * x2 / (2.0 * n + 1.0);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return 1.0 - 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x2) * sum;
  }
  if (x > 27.3) return 0.0;  // below the smallest double
  // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  // via modified Lentz.
  double f = x;
  double c = x;
  double d = 0.0;
  for (int n = 1; n < 500; ++n) {
    const double an = 0.5 * n;
    d = x + an * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = x + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x * x) / std::sqrt(std::numbers::pi) / f;
}

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ValidationError("reg_inc_beta: a and b must be positive and finite");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ValidationError("reg_inc_beta: x must lie in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double chi2_sf(double x, int dof) {
  if (dof != 1) throw ValidationError("chi2_sf: only 1 degree of freedom is supported");
  if (!(x >= 0.0)) throw ValidationError("chi2_sf: statistic must be non-negative");
  return erfc(std::sqrt(x / 2.0));
}

double t_sf_two_tailed(double t, int dof) {
  if (dof < 1) throw ValidationError("t_sf_two_tailed: dof must be >= 1");
  if (std::isnan(t)) throw ValidationError("t_sf_two_tailed: statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double v = static_cast<double>(dof);
  return reg_inc_beta(v / (v + t * t), 0.5 * v, 0.5);
}

}  // namespace biaslab
