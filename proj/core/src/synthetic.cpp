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

#include <algorithm>
#include <cmath>
#include <set>

#include "biaslab/corpus.hpp"
#include "biaslab/error.hpp"
#include "biaslab/random.hpp"

namespace biaslab {

namespace {

void check_filler(std::size_t min_filler, std::size_t max_filler) {
  if (min_filler < 1 || max_filler < min_filler) {
    throw ValidationError("filler length range must satisfy 1 <= min <= max");
  }
}

void check_disjoint(const std::vector<std::vector<std::string>>& lexicons) {
  std::set<std::string> seen;
  for (const auto& lex : lexicons) {
    if (lex.empty()) throw ValidationError("lexicons must be non-empty");
    for (const auto& w : std::set<std::string>(lex.begin(), lex.end())) {
      if (!seen.insert(w).second) {
        throw ValidationError("lexicons overlap on '" + w + "'");
      }
    }
  }
}

std::vector<std::string> filler(Rng& rng, const std::vector<std::string>& neutral,
                                std::size_t min_len, std::size_t max_len) {
  std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::vector<std::string> words;
  words.reserve(len + 4);
  for (std::size_t i = 0; i < len; ++i) {
    words.push_back(neutral[rng.below(neutral.size())]);
  }
  return words;
}

void insert_from(Rng& rng, std::vector<std::string>& words,
                 const std::vector<std::string>& lexicon, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    auto pos = static_cast<std::ptrdiff_t>(rng.below(words.size() + 1));
    words.insert(words.begin() + pos, lexicon[rng.below(lexicon.size())]);
  }
}

std::string join_sentence(const std::vector<std::string>& words) {
  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) text.push_back(' ');
    text += words[i];
  }
  text.push_back('.');
  return text;
}

// round(rate * n) indices, sampled without replacement.
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, double rate) {
  const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

LabeledCorpus generate_synthetic(const SyntheticOptions& o) {
  if (o.n < 2) throw ValidationError("synthetic corpus needs n >= 2");
  if (!(o.noise_rate >= 0.0 && o.noise_rate < 0.5)) {
    throw ValidationError("noise_rate must lie in [0, 0.5)");
  }
  if (o.max_bias_tokens < 1) throw ValidationError("max_bias_tokens must be >= 1");
  check_filler(o.min_filler, o.max_filler);
  check_disjoint({o.bias_lexicon, o.neutral_lexicon});

  Rng rng(o.seed);
  std::vector<int> labels(o.n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(o.n / 2), 1);
  rng.shuffle(std::span<int>(labels));

  std::vector<LabeledSentence> sentences;
  sentences.reserve(o.n);
  for (std::size_t i = 0; i < o.n; ++i) {
    auto words = filler(rng, o.neutral_lexicon, o.min_filler, o.max_filler);
    if (labels[i] == 1) {
      insert_from(rng, words, o.bias_lexicon, 1 + rng.below(o.max_bias_tokens));
    }
    sentences.push_back({"synthetic:" + std::to_string(i), join_sentence(words),
                         labels[i], {}});
  }
  for (auto i : sample_indices(rng, o.n, o.noise_rate)) {
    sentences[i].label = 1 - sentences[i].label;
  }
  return LabeledCorpus(std::move(sentences));
}

LabeledCorpus generate_typed_synthetic(const TypedSyntheticOptions& o) {
  if (o.n < 1) throw ValidationError("typed synthetic corpus needs n >= 1");
  if (o.type_lexicons.empty()) throw ValidationError("no type lexicons given");
  if (!(o.multi_type_rate >= 0.0 && o.multi_type_rate <= 1.0) ||
      !(o.unbiased_rate >= 0.0 && o.unbiased_rate < 1.0)) {
    throw ValidationError("rates must lie in [0, 1)");
  }
  check_filler(o.min_filler, o.max_filler);
  std::vector<std::vector<std::string>> lexicons{o.neutral_lexicon};
  for (const auto& [name, lex] : o.type_lexicons) lexicons.push_back(lex);
  check_disjoint(lexicons);

  Rng rng(o.seed);
  const std::size_t n_types = o.type_lexicons.size();
  std::vector<bool> unbiased(o.n, false);
  for (auto i : sample_indices(rng, o.n, o.unbiased_rate)) unbiased[i] = true;
  std::vector<bool> multi(o.n, false);
  if (n_types > 1) {
    for (auto i : sample_indices(rng, o.n, o.multi_type_rate)) multi[i] = true;
  }
  // Balanced primary types: cycle then shuffle.
  std::vector<std::size_t> primary(o.n);
  for (std::size_t i = 0; i < o.n; ++i) primary[i] = i % n_types;
  rng.shuffle(std::span<std::size_t>(primary));

  std::vector<LabeledSentence> sentences;
  sentences.reserve(o.n);
  for (std::size_t i = 0; i < o.n; ++i) {
    auto words = filler(rng, o.neutral_lexicon, o.min_filler, o.max_filler);
    LabeledSentence s;
    s.id = "typed:" + std::to_string(i);
    if (!unbiased[i]) {
      std::vector<std::size_t> chosen{primary[i]};
      if (multi[i]) {
        std::size_t second = (primary[i] + 1 + rng.below(n_types - 1)) % n_types;
        chosen.push_back(second);
      }
      std::sort(chosen.begin(), chosen.end());
      for (auto t : chosen) {
        insert_from(rng, words, o.type_lexicons[t].second, 1 + rng.below(2));
        s.type_labels.push_back(o.type_lexicons[t].first);
      }
      s.label = 1;
    }
    s.text = join_sentence(words);
    sentences.push_back(std::move(s));
  }
  return LabeledCorpus(std::move(sentences));
}

const std::vector<std::string>& default_bias_lexicon() {
  static const std::vector<std::string> words{
      "radical",    "disastrous", "shameful",   "reckless",  "outrageous",
      "corrupt",    "pathetic",   "heroic",     "brilliant", "sinister",
      "extremist",  "scandalous", "incompetent", "glorious", "devastating",
      "absurd",     "vile",       "triumphant", "despicable", "ludicrous",
      "catastrophic", "infamous", "greatest",   "appalling", "so-called"};
  return words;
}

const std::vector<std::string>& default_neutral_lexicon() {
  static const std::vector<std::string> words{
      "the",       "council",   "said",      "on",        "tuesday",
      "a",         "report",    "was",       "released",  "by",
      "officials", "in",        "city",      "budget",    "meeting",
      "members",   "voted",     "to",        "approve",   "plan",
      "for",       "new",       "school",    "district",  "after",
      "hearing",   "residents", "during",    "session",   "which",
      "lasted",    "two",       "hours",     "and",       "included",
      "questions", "about",     "funding",   "road",      "repairs",
      "next",      "year",      "state",     "agency",    "announced",
      "data",      "showed",    "changes",   "from",      "last",
      "month",     "local",     "office",    "statement", "committee",
      "policy",    "proposal",  "its",       "with",      "at"};
  return words;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>&
default_type_lexicons() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> lex{
      {"political",
       {"leftist", "right-wing", "partisan", "liberal-elite", "far-left",
        "far-right", "socialist", "regime", "demagogue", "propaganda"}},
      {"racial",
       {"thugs", "illegals", "ghetto", "savages", "invaders", "foreigners",
        "aliens", "hordes", "tribal", "uncivilized"}},
      {"religious",
       {"heathen", "infidels", "zealots", "godless", "fanatics", "cultish",
        "heretics", "jihadist", "bible-thumping", "idolaters"}},
      {"gender",
       {"hysterical", "bossy", "shrill", "emotional", "manly", "girly",
        "feminazi", "catty", "effeminate", "nagging"}},
      {"other",
       {"lazy", "ignorant", "worthless", "stupid", "greedy", "filthy",
        "crazy", "losers", "parasites", "deranged"}}};
  return lex;
}

}  // namespace biaslab
