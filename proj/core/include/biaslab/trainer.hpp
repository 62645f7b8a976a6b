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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslab/corpus.hpp"
#include "biaslab/encoder.hpp"

namespace biaslab {

struct TrainConfig {
  double learning_rate = 2e-5;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 3;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  // Vocabulary construction from the training split.
  std::size_t min_freq = 1;
  std::size_t max_vocab = 30000;

  // Fine-tuning settings for a pretrained model (lr 2e-5).
  static TrainConfig finetune();
  // From-scratch desk model on synthetic data (lr 1e-3).
  static TrainConfig synthetic();
  // "finetune" or "synthetic".
  static TrainConfig preset(const std::string& name);

  void validate() const;
  nlohmann::json to_json() const;
};

// Mean binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12].
double bce_loss(std::span<const double> probs, std::span<const int> labels);

// Encoded inputs with one target row per sequence. Softmax heads take one-hot
// rows; sigmoid heads take multi-hot rows.
struct TrainingSet {
  std::vector<TokenSequence> sequences;
  Matrix targets;

  std::size_t size() const { return sequences.size(); }
};

// One-hot targets for binary labels.
Matrix one_hot(std::span<const int> labels, std::size_t n_classes = 2);

// Mean loss of a batch: binary cross-entropy on the positive-class
// probability for 2-way softmax heads (equal to the softmax negative
// log-likelihood), categorical NLL for wider softmax heads, and mean
// per-output binary cross-entropy for sigmoid heads.
double batch_loss(const Matrix& probs, const Matrix& targets, HeadKind head);

struct GradientResult {
  double loss = 0.0;
  EncoderParams grads;
};

// Analytic gradient of batch_loss under a train-mode forward pass seeded with
// `dropout_seed`.
GradientResult backward(const EncoderParams& params, const EncoderConfig& config,
                        std::span<const TokenSequence> batch,
                        const Matrix& targets, std::uint64_t dropout_seed);

// Loss only, replaying the same forward pass as backward (for finite
// differences).
double loss_at(const EncoderParams& params, const EncoderConfig& config,
               std::span<const TokenSequence> batch, const Matrix& targets,
               Mode mode, std::uint64_t dropout_seed);

struct AdamState {
  EncoderParams m;
  EncoderParams v;

  static AdamState zeros_like(const EncoderConfig& config);
};

// AdamW with decoupled weight decay, skipped for biases and layer-norm
// parameters. step_index is 1-based.
void adamw_step(EncoderParams& params, const EncoderParams& grads,
                AdamState& state, const TrainConfig& config,
                std::size_t step_index);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based
  bool stopped_early = false;

  double best_f1() const;
  nlohmann::json to_json() const;
};

// Scores validation probabilities against targets; higher is better.
using ValidationMetric = std::function<double(const Matrix& probs, const Matrix& targets)>;

// Macro F1 of argmax predictions against one-hot targets.
double macro_f1_metric(const Matrix& probs, const Matrix& targets);

// Shuffled mini-batch AdamW training with early stopping on `metric`.
// On return model.params holds the parameters of the best epoch (ties go to
// the earliest).
TrainHistory fit(Model& model, const TrainingSet& train, const TrainingSet& val,
                 const TrainConfig& config, const ValidationMetric& metric);

struct TrainResult {
  Model model;
  TrainHistory history;
};

// Trains a binary bias detector. The vocabulary is built from `train_corpus`
// and config.vocab_size is set from it.
TrainResult train(const LabeledCorpus& train_corpus, const LabeledCorpus& val_corpus,
                  EncoderConfig encoder_config, const TrainConfig& train_config);

}  // namespace biaslab
