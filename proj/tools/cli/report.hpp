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

// Report assembly and text-table rendering.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslab/metrics.hpp"
#include "biaslab/stattests.hpp"

namespace biaslab::cli {

// 64-bit FNV-1a digest of a file's bytes as 16 lowercase hex digits.
std::string file_digest(const std::filesystem::path& path);

// {"path", "fnv1a64"} record for a report's input list.
nlohmann::json input_record(const std::filesystem::path& path);

// "0.9257 (0.0035)"
std::string format_score(double mean, double stderr_);

// Three significant digits in scientific notation, e.g. "1.18e-12".
std::string format_p(double p);

// Model | Macro F1 (error)
std::string f1_table(const std::vector<std::pair<std::string, FoldScores>>& rows);

// One row per fold plus a Mean row. Folds without a defined statistic are
// printed as n/a and excluded from the mean.
struct McNemarRow {
  std::string fold;
  bool defined = true;
  McNemarResult result;
};
std::string mcnemar_table(const std::vector<McNemarRow>& rows);

std::string five_two_line(const FiveTwoResult& r);

}  // namespace biaslab::cli
