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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslab/corpus.hpp"
#include "biaslab/encoder.hpp"
#include "biaslab/trainer.hpp"

namespace biaslab {

struct TypeClassifierConfig {
  std::vector<std::string> labels{"political", "racial", "religious", "gender", "other"};
  // One per label; empty means 0.5 for every label.
  std::vector<double> thresholds;

  std::vector<double> resolved_thresholds() const;
  void validate() const;
};

// Multi-label targets (one column per configured label) for the sentences of
// `corpus` that carry type annotations.
TrainingSet encode_typed(const LabeledCorpus& corpus, const TypeClassifierConfig& types,
                         const Vocabulary& vocab, std::size_t max_len);

// Mean over labels of the positive-class F1 at each label's threshold.
double mean_label_f1(const Matrix& probs, const Matrix& targets,
                     std::span<const double> thresholds);

// Stage-2 model: the shared encoder with a sigmoid head, one output per label,
// trained on mean per-label binary cross-entropy with early stopping on mean
// per-label F1. Only sentences with type annotations are used.
TrainResult train_type_classifier(const LabeledCorpus& train_corpus,
                                  const LabeledCorpus& val_corpus,
                                  const TypeClassifierConfig& types,
                                  EncoderConfig encoder_config,
                                  const TrainConfig& train_config);

struct BiasAnalysis {
  std::string text;
  bool is_biased = false;
  double bias_probability = 0.0;
  // Labels at or above threshold, descending by probability.
  std::vector<std::pair<std::string, double>> types;
  bool stage2_skipped = true;

  nlohmann::json to_json() const;
  bool operator==(const BiasAnalysis&) const = default;
};

inline constexpr double kDefaultGate = 0.5;

// Gating and thresholding rules on already-computed scores. type_probs is
// ignored (and may be empty) when the gate rejects.
BiasAnalysis combine_stages(std::string text, double bias_probability,
                            std::span<const double> type_probs,
                            std::span<const std::string> labels,
                            std::span<const double> thresholds, double gate);

BiasAnalysis analyze(const Model& detector, const Model& type_model,
                     std::string_view sentence, double gate = kDefaultGate);

std::vector<BiasAnalysis> analyze_batch(const Model& detector, const Model& type_model,
                                        std::span<const std::string> sentences,
                                        double gate = kDefaultGate);

}  // namespace biaslab
