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

// Forward-pass intermediates kept for backpropagation.

#include <cstddef>
#include <vector>

#include "biaslab/encoder.hpp"

namespace biaslab::detail {

struct LayerCache {
  Matrix input;                // rows x d
  Matrix q, k, v;              // rows x d
  std::vector<Matrix> attn;    // per head, rows x rows
  Matrix context;              // rows x d (heads concatenated)
  Matrix attn_dropout;         // multipliers, empty when inactive
  Matrix norm1_xhat;           // rows x d
  Eigen::VectorXd norm1_inv_std;
  Matrix x1;                   // rows x d
  Matrix ffn_pre;              // rows x d_ff
  Matrix ffn_act;              // rows x d_ff
  Matrix ffn_dropout;          // multipliers, empty when inactive
  Matrix norm2_xhat;           // rows x d
  Eigen::VectorXd norm2_inv_std;
};

struct SequenceCache {
  std::size_t rows = 0;
  std::size_t real_length = 0;
  Matrix embed_dropout;  // multipliers, empty when inactive
  std::vector<LayerCache> layers;
  Matrix hidden;  // final layer output, rows x d
};

// Runs one sequence through the encoder body over its first `rows` positions;
// keys at positions >= real_length are masked.
SequenceCache forward_sequence(const EncoderParams& params,
                               const EncoderConfig& config,
                               const TokenSequence& seq, std::size_t rows,
                               bool train, std::uint64_t dropout_seed,
                               std::size_t sequence_index);

// Checks batch shape, id range and mask layout against the config.
void validate_batch(const EncoderConfig& config,
                    std::span<const TokenSequence> batch);

double gelu(double x);
double gelu_derivative(double x);

}  // namespace biaslab::detail
