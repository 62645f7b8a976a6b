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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslab/corpus.hpp"
#include "biaslab/encoder.hpp"

namespace biaslab {

// [CLS]-query attention over the content tokens of one sentence. Weights are
// attention as-is (renormalized), not a causal attribution.
struct TokenAttribution {
  std::vector<std::string> tokens;
  std::vector<double> weights;
  std::size_t layer = 0;
  std::string aggregation = "head_mean/cls_query/specials_dropped/renormalized";
  int predicted_label = 0;
  // Positive-class probability for binary heads, top probability otherwise.
  double probability = 0.0;

  nlohmann::json to_json() const;
  static TokenAttribution from_json(const nlohmann::json& j);
};

// Final layer, mean over heads, [CLS] query row; [CLS]/[SEP]/[PAD] keys are
// dropped and the rest renormalized to sum to 1.
TokenAttribution cls_attention(const Model& model, std::string_view sentence);

enum class ErrorCategory { correct, false_positive, false_negative };
const char* to_string(ErrorCategory c);
ErrorCategory categorize(int gold, int predicted);

struct ErrorCase {
  std::string id;
  std::string text;
  int gold = 0;
  std::array<int, 2> predicted{};        // model A, model B
  std::array<double, 2> probability{};   // positive-class probability
  std::array<ErrorCategory, 2> category{};

  nlohmann::json to_json() const;
};

// Sentences where either model errs or the two disagree, sorted by
// |prob_a - prob_b| descending (stable in corpus order).
std::vector<ErrorCase> error_cases_from_probs(const LabeledCorpus& corpus,
                                              std::span<const double> prob_a,
                                              std::span<const double> prob_b);

// Restricts error mining to one test fold of a plan.
struct FoldSelector {
  SplitPlan plan;
  std::size_t partition = 0;
  int fold = 0;
};

std::vector<ErrorCase> error_cases(const Model& a, const Model& b,
                                   const LabeledCorpus& corpus,
                                   const std::optional<FoldSelector>& split = std::nullopt);

enum class HeatmapFormat { json, svg };

// One row of token cells; fill opacity is weight / max weight and each cell
// carries its weight to 3 decimals in a <title> tooltip.
std::string heatmap_svg(const TokenAttribution& attribution);
void export_heatmap(const TokenAttribution& attribution,
                    const std::filesystem::path& path, HeatmapFormat format);
// "token:0.123 token:0.456 ..." for terminals.
std::string render_terminal(const TokenAttribution& attribution);

}  // namespace biaslab
