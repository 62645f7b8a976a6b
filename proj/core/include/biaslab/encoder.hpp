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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "biaslab/tokenizer.hpp"

namespace biaslab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// softmax yields mutually exclusive class probabilities; sigmoid yields one
// independent probability per output (multi-label).
enum class HeadKind { softmax, sigmoid };

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 256;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t n_classes = 2;
  double dropout_rate = 0.1;
  double layer_norm_epsilon = 1e-5;
  HeadKind head = HeadKind::softmax;

  std::size_t head_dim() const { return d_model / n_heads; }
  // Throws ValidationError on zero dims, d_model % n_heads != 0 or a dropout
  // rate outside [0, 1).
  void validate() const;

  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
  bool operator==(const EncoderConfig&) const = default;
};

// Post-layer-norm block: attention, residual, norm, GELU feed-forward,
// residual, norm. Weights are stored input-major (x * W).
struct LayerParams {
  Matrix query, key, value, output;  // d_model x d_model
  Matrix ffn_in;                     // d_model x d_ff
  Matrix ffn_in_bias;                // 1 x d_ff
  Matrix ffn_out;                    // d_ff x d_model
  Matrix ffn_out_bias;               // 1 x d_model
  Matrix norm1_gain, norm1_bias;     // 1 x d_model
  Matrix norm2_gain, norm2_bias;     // 1 x d_model
};

struct EncoderParams {
  Matrix token_embedding;     // vocab_size x d_model
  Matrix position_embedding;  // max_len x d_model
  std::vector<LayerParams> layers;
  Matrix classifier;       // d_model x n_classes
  Matrix classifier_bias;  // 1 x n_classes

  // All-zero tensors shaped for `config`.
  static EncoderParams zeros(const EncoderConfig& config);

  // Visits every tensor in canonical (checkpoint) order as
  // f(name, matrix, decays) where `decays` is false for biases and
  // layer-norm parameters.
  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  std::size_t parameter_count() const;
  // Bitwise equality of every tensor.
  bool identical(const EncoderParams& other) const;
  // Throws ValidationError unless every tensor matches `config` and is finite.
  void check(const EncoderConfig& config) const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    f("embeddings.token", self.token_embedding, true);
    f("embeddings.position", self.position_embedding, true);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      auto& layer = self.layers[l];
      const std::string p = "layers." + std::to_string(l) + ".";
      f(p + "attention.query", layer.query, true);
      f(p + "attention.key", layer.key, true);
      f(p + "attention.value", layer.value, true);
      f(p + "attention.output", layer.output, true);
      f(p + "norm1.gain", layer.norm1_gain, false);
      f(p + "norm1.bias", layer.norm1_bias, false);
      f(p + "ffn.in.weight", layer.ffn_in, true);
      f(p + "ffn.in.bias", layer.ffn_in_bias, false);
      f(p + "ffn.out.weight", layer.ffn_out, true);
      f(p + "ffn.out.bias", layer.ffn_out_bias, false);
      f(p + "norm2.gain", layer.norm2_gain, false);
      f(p + "norm2.bias", layer.norm2_bias, false);
    }
    f("classifier.weight", self.classifier, true);
    f("classifier.bias", self.classifier_bias, false);
  }
};

// Weights ~ N(0, 0.02^2), biases 0, layer-norm gains 1.
EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed);

enum class Mode { eval, train };

struct ForwardOptions {
  Mode mode = Mode::eval;
  bool capture_attention = false;
  // Seeds the counter-based dropout masks (train mode only).
  std::uint64_t dropout_seed = 0;
};

// Attention probabilities of one sequence, layer x head x query x key.
struct AttentionMaps {
  std::size_t n_layers = 0;
  std::size_t n_heads = 0;
  std::size_t length = 0;
  std::vector<double> values;

  double at(std::size_t layer, std::size_t head, std::size_t query,
            std::size_t key) const {
    return values[((layer * n_heads + head) * length + query) * length + key];
  }
};

struct ForwardOutput {
  Matrix logits;  // batch x n_classes
  Matrix probs;   // batch x n_classes
  Matrix h_cls;   // batch x d_model
  std::vector<AttentionMaps> attention;  // one per row when captured
};

// Runs the encoder over a batch of equal-length sequences. Padded key
// positions receive exactly zero attention. Without attention capture only
// the unmasked prefix of each sequence is computed, which is exact because
// padded positions never act as keys.
ForwardOutput forward(const EncoderParams& params, const EncoderConfig& config,
                      std::span<const TokenSequence> batch,
                      const ForwardOptions& options = {});

// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> scores);

// Argmax per row; ties go to the lower class index.
std::vector<int> predicted_labels(const Matrix& probs);

// ---------------------------------------------------------------------------
// Models and checkpoints

struct ModelInfo {
  // "detector", "type_classifier" or "majority_baseline".
  std::string kind = "detector";
  // One name per head output.
  std::vector<std::string> labels{"unbiased", "biased"};
  // Per-label decision thresholds (sigmoid heads).
  std::vector<double> thresholds;

  bool operator==(const ModelInfo&) const = default;
};

struct Model {
  EncoderConfig config;
  Vocabulary vocab;
  EncoderParams params;
  ModelInfo info;
};

inline constexpr int kCheckpointVersion = 1;

std::vector<TokenSequence> encode_batch(std::span<const std::string> texts,
                                        const Vocabulary& vocab,
                                        std::size_t max_len);

// Eval-mode probabilities (rows follow `texts`).
Matrix predict_probs(const Model& model, std::span<const std::string> texts,
                     std::size_t batch_size = 64);

// Constant predictor in the standard model format: a minimal encoder with
// zero classifier weights and Laplace-smoothed log-prior biases, so every
// input gets the training prior and the majority label (ties -> 0).
Model majority_baseline(std::size_t n_positive, std::size_t n_total);

// JSON header, "\n\0", then little-endian float64 tensor data in manifest
// order.
std::string serialize_checkpoint(const Model& model);
Model parse_checkpoint(std::string_view bytes);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace biaslab
