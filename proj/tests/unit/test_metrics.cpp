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

#include "biaslab/error.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/random.hpp"

using namespace biaslab;

namespace {

double brute_macro_f1(const std::vector<int>& pred, const std::vector<int>& gold) {
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      tp += pred[i] == c && gold[i] == c;
      fp += pred[i] == c && gold[i] != c;
      fn += pred[i] != c && gold[i] == c;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return sum / 2.0;
}

}  // namespace

TEST_CASE("confusion matrix hand counts") {
  const auto perfect = confusion(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1});
  CHECK(perfect.at(1, 1) == 2);
  CHECK(perfect.at(0, 0) == 1);
  CHECK(perfect.at(0, 1) + perfect.at(1, 0) == 0);

  const auto cm = confusion(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 0, 0});
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(0, 0) == 2);
  CHECK(cm.at(1, 0) == 0);
  CHECK(cm.total() == 4);

  CHECK_THROWS_AS(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), ValidationError);
  CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{1}), ValidationError);
}

TEST_CASE("macro F1 hand examples") {
  const auto cm = confusion(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 0, 0});
  CHECK(std::abs(class_f1(cm, 1) - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(class_f1(cm, 0) - 0.8) < 1e-15);
  CHECK(std::abs(macro_f1(cm) - 0.7333333333333333) < 1e-15);

  const auto all_one = confusion(std::vector<int>{1, 1, 1, 1}, std::vector<int>{1, 1, 0, 0});
  CHECK(class_f1(all_one, 0) == 0.0);
  CHECK(std::abs(macro_f1(all_one) - 1.0 / 3.0) < 1e-15);
  CHECK(macro_f1(confusion(std::vector<int>{0, 1}, std::vector<int>{0, 1})) == 1.0);
  CHECK(accuracy(cm) == 0.75);
}

TEST_CASE("macro F1 agrees with a brute-force oracle and is label-symmetric") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<int> pred(n), gold(n), pred_sw(n), gold_sw(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.below(2));
      gold[i] = static_cast<int>(rng.below(2));
      pred_sw[i] = 1 - pred[i];
      gold_sw[i] = 1 - gold[i];
    }
    const double f1 = macro_f1(confusion(pred, gold));
    CHECK(std::abs(f1 - brute_macro_f1(pred, gold)) < 1e-12);
    CHECK(std::abs(f1 - macro_f1(confusion(pred_sw, gold_sw))) < 1e-12);
  }
}

TEST_CASE("mean and standard error") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto r = mean_and_stderr(v);
  CHECK(r.mean == 3.0);
  CHECK(std::abs(r.stderr_ - std::sqrt(2.5) / std::sqrt(5.0)) < 1e-15);
  CHECK(mean_and_stderr(std::vector<double>{0.4, 0.4, 0.4}).stderr_ == 0.0);
  CHECK_THROWS_AS(mean_and_stderr(std::vector<double>{1.0}), ValidationError);
  CHECK(mean_of(std::vector<double>{1.0}) == 1.0);
  const auto scores = FoldScores::from({0.5, 0.7});
  CHECK(scores.mean == doctest::Approx(0.6));
  CHECK(scores.to_json().at("per_fold").size() == 2);
}
