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

#include "biaslab/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "biaslab/error.hpp"

namespace biaslab {

namespace {

bool is_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u) != 0;
}

bool is_space(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 128 && std::isspace(u) != 0;
}

}  // namespace

const std::vector<std::string>& Vocabulary::special_strings() {
  static const std::vector<std::string> s{"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  return s;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  const auto& specials = special_strings();
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (t.empty()) throw ValidationError("vocabulary token is empty");
    if (std::find(specials.begin(), specials.end(), t) != specials.end()) {
      throw ValidationError("vocabulary token '" + t + "' is reserved");
    }
    if (!index_.emplace(t, static_cast<TokenId>(kNumSpecial + i)).second) {
      throw ValidationError("duplicate vocabulary token '" + t + "'");
    }
  }
}

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    throw ValidationError("token id " + std::to_string(id) + " out of range");
  }
  if (static_cast<std::size_t>(id) < kNumSpecial) {
    return special_strings()[static_cast<std::size_t>(id)];
  }
  return tokens_[static_cast<std::size_t>(id) - kNumSpecial];
}

nlohmann::json Vocabulary::to_json() const {
  return {{"specials", special_strings()}, {"tokens", tokens_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  try {
    if (j.at("specials").get<std::vector<std::string>>() != special_strings()) {
      throw ValidationError("vocabulary special-token layout mismatch");
    }
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed vocabulary: ") + e.what());
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (start == i) continue;
    std::string_view word = text.substr(start, i - start);

    std::size_t lead = 0;
    while (lead < word.size() && is_punct(word[lead])) ++lead;
    std::size_t trail = word.size();
    while (trail > lead && is_punct(word[trail - 1])) --trail;

    for (std::size_t p = 0; p < lead; ++p) out.emplace_back(1, word[p]);
    if (trail > lead) {
      std::string core(word.substr(lead, trail - lead));
      for (auto& c : core) {
        auto u = static_cast<unsigned char>(c);
        if (u < 128) c = static_cast<char>(std::tolower(u));
      }
      out.push_back(std::move(core));
    }
    for (std::size_t p = trail; p < word.size(); ++p) out.emplace_back(1, word[p]);
  }
  return out;
}

Vocabulary build_vocab(std::span<const std::string> texts, std::size_t min_freq,
                       std::size_t max_size) {
  if (texts.empty()) throw ValidationError("cannot build vocabulary: corpus empty");
  if (max_size <= Vocabulary::kNumSpecial) {
    throw ValidationError("vocabulary max_size must exceed the 4 special tokens");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& tok : tokenize(t)) ++counts[std::move(tok)];
  }
  const auto& specials = Vocabulary::special_strings();
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (n < min_freq) continue;
    if (std::find(specials.begin(), specials.end(), tok) != specials.end()) continue;
    ranked.emplace_back(tok, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  const std::size_t keep = std::min(ranked.size(), max_size - Vocabulary::kNumSpecial);
  std::vector<std::string> tokens;
  tokens.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(std::move(ranked[i].first));
  return Vocabulary(std::move(tokens));
}

Vocabulary build_vocab(const LabeledCorpus& corpus, std::size_t min_freq,
                       std::size_t max_size) {
  auto texts = corpus.texts();
  return build_vocab(std::span<const std::string>(texts), min_freq, max_size);
}

TokenSequence encode(std::string_view text, const Vocabulary& vocab,
                     std::size_t max_len) {
  if (max_len < 3) throw ValidationError("max_len must be >= 3");
  auto words = tokenize(text);
  const std::size_t n_real = std::min(words.size(), max_len - 2);

  TokenSequence seq;
  seq.ids.assign(max_len, Vocabulary::kPad);
  seq.mask.assign(max_len, 0);
  seq.token_strings.reserve(n_real + 2);

  seq.ids[0] = Vocabulary::kCls;
  seq.token_strings.push_back(vocab.token_of(Vocabulary::kCls));
  for (std::size_t i = 0; i < n_real; ++i) {
    seq.ids[i + 1] = vocab.id_of(words[i]);
    seq.token_strings.push_back(words[i]);
  }
  seq.ids[n_real + 1] = Vocabulary::kSep;
  seq.token_strings.push_back(vocab.token_of(Vocabulary::kSep));
  std::fill(seq.mask.begin(), seq.mask.begin() + static_cast<std::ptrdiff_t>(n_real + 2), 1);
  return seq;
}

}  // namespace biaslab
