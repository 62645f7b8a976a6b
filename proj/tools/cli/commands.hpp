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

// Command implementations behind the biaslab executable. Each command takes
// a fully resolved option record and returns a report; printing is left to
// the caller.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslab/corpus.hpp"
#include "biaslab/encoder.hpp"
#include "biaslab/interpret.hpp"
#include "biaslab/trainer.hpp"

namespace biaslab::cli {

namespace fs = std::filesystem;

inline constexpr int kReportVersion = 1;

enum class OutputFormat { json, table };

struct Report {
  nlohmann::json body;
  std::string table;  // aligned text rendering, empty when not applicable
};

// Encoder and optimizer settings shared by every command that trains.
struct ModelOptions {
  std::string preset = "synthetic";
  EncoderConfig encoder;
  TrainConfig train = TrainConfig::synthetic();
  double val_fraction = 0.1;
  nlohmann::json to_json() const;
};

struct CorpusInput {
  fs::path path;
  CorpusSchema schema;
  std::optional<fs::path> schema_path;
};

struct GenerateOptions {
  fs::path out;
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  double noise_rate = 0.05;
  bool typed = false;
  double multi_type_rate = 0.0;
  double unbiased_rate = 0.0;
};

struct SplitOptions {
  CorpusInput corpus;
  int k = 5;
  std::uint64_t seed = 0;
  bool five_by_two = false;
  fs::path out;
};

struct TrainOptions {
  CorpusInput corpus;
  ModelOptions model;
  fs::path out;
};

struct TrainTypesOptions {
  CorpusInput corpus;
  ModelOptions model;
  std::vector<std::string> labels;
  std::vector<double> thresholds;
  fs::path out;
};

struct BaselineOptions {
  CorpusInput corpus;
  fs::path out;
};

struct EvalOptions {
  CorpusInput corpus;
  std::optional<fs::path> plan;
  int k = 5;
  std::uint64_t split_seed = 0;
  std::optional<fs::path> plan_out;
  std::optional<fs::path> checkpoint;  // architecture template
  ModelOptions model;
  std::string name = "model";
};

struct CompareOptions {
  CorpusInput corpus;
  fs::path plan;
  std::optional<fs::path> plan_5x2;
  fs::path a;
  fs::path b;
  std::string name_a = "A";
  std::string name_b = "B";
  bool mcnemar = true;
  bool five_two = false;
  bool correction = true;
  bool retrain = false;
  ModelOptions model;
};

struct ExplainOptions {
  fs::path checkpoint;
  std::optional<std::string> sentence;
  std::optional<CorpusInput> corpus;
  std::size_t limit = 20;
  fs::path out_dir = ".";
  bool json = true;
  bool svg = true;
};

struct PipelineOptions {
  fs::path detector;
  fs::path types;
  fs::path input;
  std::optional<fs::path> out;
  double gate = 0.5;
};

Report cmd_generate(const GenerateOptions& o);
Report cmd_split(const SplitOptions& o);
Report cmd_train(const TrainOptions& o);
Report cmd_train_types(const TrainTypesOptions& o);
Report cmd_baseline(const BaselineOptions& o);
Report cmd_eval(const EvalOptions& o);
Report cmd_compare(const CompareOptions& o);
Report cmd_explain(const ExplainOptions& o);
// Writes JSON lines to o.out (or returns them in Report::table when unset).
Report cmd_pipeline(const PipelineOptions& o);

struct FoldModel {
  Model model;
  std::optional<TrainHistory> history;  // unset for refitted baselines
};

// Trains one fold model on `train`, holding out options.val_fraction of it
// for early stopping. A majority-baseline template is refitted from the
// fold's label counts; a detector template contributes its architecture;
// without a template the architecture comes from `options`.
FoldModel fit_fold_model(const Model* templ, const LabeledCorpus& train,
                         const ModelOptions& options, std::uint64_t seed);

// Reads the "text" field of JSON lines, or plain text lines.
std::vector<std::string> read_sentences(const fs::path& path);

// Default schema plus the optional "id" and "types" columns when the file's
// header (or first JSONL record) has them, so corpora written by this tool
// load back without a schema file.
CorpusSchema detect_schema(const fs::path& path);

}  // namespace biaslab::cli
