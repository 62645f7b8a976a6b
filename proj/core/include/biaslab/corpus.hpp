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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace biaslab {

// One annotated sentence. label is 1 for biased, 0 for unbiased.
struct LabeledSentence {
  std::string id;
  std::string text;
  int label = 0;
  // Bias-type annotations; only consumed by the type classifier.
  std::vector<std::string> type_labels;

  bool operator==(const LabeledSentence&) const = default;
};

// Ordered, validated collection of sentences. Construction enforces the
// corpus invariants (binary labels, non-blank text, unique ids) so every
// LabeledCorpus in circulation is well formed.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;
  explicit LabeledCorpus(std::vector<LabeledSentence> sentences);

  const std::vector<LabeledSentence>& sentences() const { return sentences_; }
  const LabeledSentence& operator[](std::size_t i) const { return sentences_[i]; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }

  // Number of sentences carrying `label` (0 or 1).
  std::size_t label_count(int label) const { return label_counts_.at(label); }
  const std::array<std::size_t, 2>& label_counts() const { return label_counts_; }

  std::vector<int> labels() const;
  std::vector<std::string> texts() const;

  // Sub-corpus in the given index order.
  LabeledCorpus subset(std::span<const std::size_t> indices) const;

  bool operator==(const LabeledCorpus& other) const {
    return sentences_ == other.sentences_;
  }

 private:
  std::vector<LabeledSentence> sentences_;
  std::array<std::size_t, 2> label_counts_{0, 0};
};

enum class FileFormat { csv, tsv, jsonl };

// Picks the format from the file extension (.csv, .tsv/.tab, .jsonl/.ndjson).
FileFormat format_from_extension(const std::filesystem::path& path);
FileFormat parse_file_format(const std::string& name);

// Column mapping used to ingest a corpus file. The defaults load a plain
// two-column file with `text` and `label` columns holding 0/1.
struct CorpusSchema {
  std::string text_column = "text";
  std::string label_column = "label";
  std::optional<std::string> id_column;
  // Column holding bias types, either a JSON array (jsonl) or a
  // semicolon-separated list.
  std::optional<std::string> types_column;
  std::map<std::string, int> label_map{{"0", 0}, {"1", 1}};
  std::optional<FileFormat> format;

  // Schema for BABE-style exports: `text`, `label_bias` with
  // "Biased"/"Non-biased" values.
  static CorpusSchema babe();

  static CorpusSchema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Reads a CSV/TSV/JSON-lines corpus. Ids default to `<filename>:<row>` with
// a zero-based data-row index.
LabeledCorpus load_corpus(const std::filesystem::path& path,
                          const CorpusSchema& schema = {});

// Writes id/text/label/types columns; `round_trip_schema()` reads it back.
void write_corpus(const LabeledCorpus& corpus,
                  const std::filesystem::path& path,
                  std::optional<FileFormat> format = std::nullopt);
CorpusSchema round_trip_schema();

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SyntheticOptions {
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  std::vector<std::string> bias_lexicon;
  std::vector<std::string> neutral_lexicon;
  double noise_rate = 0.0;
  std::size_t min_filler = 6;
  std::size_t max_filler = 14;
  // Upper bound on bias tokens embedded per biased sentence (at least one).
  std::size_t max_bias_tokens = 2;
};

// Half of the sentences (floor(n/2)) are biased: neutral filler with one or
// more bias-lexicon tokens inserted. Exactly round(noise_rate * n) labels are
// then flipped.
LabeledCorpus generate_synthetic(const SyntheticOptions& options);

struct TypedSyntheticOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  // (type label, lexicon) pairs; lexicons pairwise disjoint.
  std::vector<std::pair<std::string, std::vector<std::string>>> type_lexicons;
  std::vector<std::string> neutral_lexicon;
  // Fraction of sentences annotated with two types instead of one.
  double multi_type_rate = 0.0;
  // Fraction of unbiased (label 0, no types) sentences.
  double unbiased_rate = 0.0;
  std::size_t min_filler = 6;
  std::size_t max_filler = 14;
};

// Biased sentences carry type_labels naming the lexicons they draw from.
LabeledCorpus generate_typed_synthetic(const TypedSyntheticOptions& options);

const std::vector<std::string>& default_bias_lexicon();
const std::vector<std::string>& default_neutral_lexicon();
// political, racial, religious, gender, other.
const std::vector<std::pair<std::string, std::vector<std::string>>>&
default_type_lexicons();

// ---------------------------------------------------------------------------
// Split plans

enum class SplitKind { k_fold, five_by_two };

// Fold assignment for every sentence, per partition. A k-fold plan has one
// partition with folds 0..k-1; a 5x2 plan has five partitions with folds
// 0 (A) and 1 (B).
struct SplitPlan {
  SplitKind kind = SplitKind::k_fold;
  std::uint64_t seed = 0;
  int k = 0;
  std::vector<std::string> ids;
  // partitions[p][i] = fold of ids[i] in partition p.
  std::vector<std::vector<int>> partitions;

  std::size_t partition_count() const { return partitions.size(); }
  int folds_per_partition() const { return kind == SplitKind::k_fold ? k : 2; }

  // Indices (into ids / the aligned corpus) of the test or train side of a fold.
  std::vector<std::size_t> test_indices(std::size_t partition, int fold) const;
  std::vector<std::size_t> train_indices(std::size_t partition, int fold) const;

  nlohmann::json to_json() const;
  static SplitPlan from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static SplitPlan load(const std::filesystem::path& path);

  // Reorders the plan to follow the corpus order; throws when the id sets
  // differ.
  SplitPlan aligned_to(const LabeledCorpus& corpus) const;

  bool operator==(const SplitPlan&) const = default;
};

// Per-class seeded shuffle followed by a round-robin fold assignment that
// continues across classes, so both fold sizes and per-class counts stay
// within one of ideal.
SplitPlan stratified_kfold(const LabeledCorpus& corpus, int k,
                           std::uint64_t seed);

// Five independent stratified 2-fold partitions; replication r uses
// derive_seed(seed, r).
SplitPlan five_by_two_splits(const LabeledCorpus& corpus, std::uint64_t seed);

// Stratified holdout: returns (train, validation) index sets with
// round(fraction * class size) members of each class (at least one) held out.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_holdout(const LabeledCorpus& corpus, double fraction,
                   std::uint64_t seed);

}  // namespace biaslab
