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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslab/corpus.hpp"

namespace biaslab {

using TokenId = std::int32_t;

// Word-level vocabulary with a fixed special-token layout.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kCls = 2;
  static constexpr TokenId kSep = 3;
  static constexpr std::size_t kNumSpecial = 4;
  static const std::vector<std::string>& special_strings();

  Vocabulary() = default;
  // Ids are assigned in order starting after the specials. Tokens must be
  // unique and must not collide with a special string.
  explicit Vocabulary(std::vector<std::string> tokens);

  TokenId id_of(std::string_view token) const;  // kUnk when absent
  const std::string& token_of(TokenId id) const;
  std::size_t size() const { return kNumSpecial + tokens_.size(); }
  // Non-special tokens in id order.
  const std::vector<std::string>& tokens() const { return tokens_; }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Lowercased whitespace tokens; leading and trailing ASCII punctuation is
// split off one character per token ("(wow)," -> "(", "wow", ")", ",").
std::vector<std::string> tokenize(std::string_view text);

// Frequency-ranked vocabulary: tokens with count >= min_freq, most frequent
// first, ties broken lexicographically. max_size bounds the total size,
// specials included.
Vocabulary build_vocab(const LabeledCorpus& corpus, std::size_t min_freq,
                       std::size_t max_size);
Vocabulary build_vocab(std::span<const std::string> texts, std::size_t min_freq,
                       std::size_t max_size);

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> mask;
  // Display strings for the unmasked prefix ([CLS] ... [SEP]).
  std::vector<std::string> token_strings;

  std::size_t length() const { return ids.size(); }
  std::size_t real_length() const { return token_strings.size(); }
};

inline constexpr std::size_t kDefaultMaxLen = 128;

// [CLS] tokens... [SEP] followed by [PAD]s up to max_len. At most max_len - 2
// real tokens are kept.
TokenSequence encode(std::string_view text, const Vocabulary& vocab,
                     std::size_t max_len = kDefaultMaxLen);

}  // namespace biaslab
