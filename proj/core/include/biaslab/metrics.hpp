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

// counts[true][predicted] for classes {0, 1}.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
  }
  std::size_t total() const;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> gold);

double precision(const ConfusionMatrix& cm, int cls);
double recall(const ConfusionMatrix& cm, int cls);
// 2PR / (P + R), and 0 when P + R = 0.
double class_f1(const ConfusionMatrix& cm, int cls);
// Unweighted mean of the two per-class F1 scores.
double macro_f1(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

double mean_of(std::span<const double> values);
// Sample standard deviation (n - 1) over sqrt(n); needs at least two values.
MeanStderr mean_and_stderr(std::span<const double> values);

struct FoldScores {
  std::vector<double> per_fold;
  double mean = 0.0;
  double stderr_ = 0.0;

  static FoldScores from(std::vector<double> per_fold);
  nlohmann::json to_json() const;
};

}  // namespace biaslab
