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

#include "biaslab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "biaslab/error.hpp"

namespace biaslab {

std::size_t ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) {
    throw ValidationError("confusion: length mismatch (" +
                          std::to_string(predicted.size()) + " vs " +
                          std::to_string(gold.size()) + ")");
  }
  if (gold.empty()) throw ValidationError("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if ((gold[i] != 0 && gold[i] != 1) || (predicted[i] != 0 && predicted[i] != 1)) {
      throw ValidationError("confusion: label out of range at index " +
                            std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(predicted[i])];
  }
  return cm;
}

double precision(const ConfusionMatrix& cm, int cls) {
  const std::size_t tp = cm.at(cls, cls);
  const std::size_t predicted = cm.at(0, cls) + cm.at(1, cls);
  return predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
}

double recall(const ConfusionMatrix& cm, int cls) {
  const std::size_t tp = cm.at(cls, cls);
  const std::size_t actual = cm.at(cls, 0) + cm.at(cls, 1);
  return actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
}

double class_f1(const ConfusionMatrix& cm, int cls) {
  const double p = precision(cm, cls);
  const double r = recall(cm, cls);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("macro_f1: empty confusion matrix");
  return 0.5 * (class_f1(cm, 0) + class_f1(cm, 1));
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("accuracy: empty confusion matrix");
  return static_cast<double>(cm.at(0, 0) + cm.at(1, 1)) / static_cast<double>(cm.total());
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean of an empty sequence");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

MeanStderr mean_and_stderr(std::span<const double> values) {
  if (values.size() < 2) {
    throw ValidationError("standard error needs at least 2 values");
  }
  const double mean = mean_of(values);
  // Deviations from the first value are exact for constant sequences, so
  // their spread comes out as exactly zero.
  const double shift = values.front();
  double sum = 0.0, ss = 0.0;
  for (double v : values) {
    sum += v - shift;
    ss += (v - shift) * (v - shift);
  }
  const double n = static_cast<double>(values.size());
  const double sd = std::sqrt(std::max(ss - sum * sum / n, 0.0) / (n - 1.0));
  return {mean, sd / std::sqrt(n)};
}

FoldScores FoldScores::from(std::vector<double> per_fold) {
  FoldScores s;
  auto ms = mean_and_stderr(per_fold);
  s.per_fold = std::move(per_fold);
  s.mean = ms.mean;
  s.stderr_ = ms.stderr_;
  return s;
}

nlohmann::json FoldScores::to_json() const {
  return {{"per_fold", per_fold}, {"mean", mean}, {"stderr", stderr_}};
}

}  // namespace biaslab
