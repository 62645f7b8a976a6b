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

#include <doctest.h>

#include "biaslab/error.hpp"
#include "biaslab/tokenizer.hpp"

using namespace biaslab;

TEST_CASE("tokenize lowercases and splits edge punctuation") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(tokenize("  \"Quoted\"  words ") ==
        std::vector<std::string>{"\"", "quoted", "\"", "words"});
  CHECK(tokenize("zzz-unseen") == std::vector<std::string>{"zzz-unseen"});
  CHECK(tokenize("").empty());
}

TEST_CASE("vocabulary orders by frequency with lexicographic ties") {
  const std::vector<std::string> texts{"a b b", "b c"};
  const auto v = build_vocab(texts, 1, 100);
  CHECK(v.tokens() == std::vector<std::string>{"b", "a", "c"});
  CHECK(v.id_of("b") == 4);
  CHECK(v.id_of("a") == 5);
  CHECK(v.id_of("c") == 6);
  CHECK(build_vocab(texts, 2, 100).tokens() == std::vector<std::string>{"b"});
  CHECK(build_vocab(texts, 1, 5).tokens() == std::vector<std::string>{"b"});
  CHECK_THROWS_AS(build_vocab(std::vector<std::string>{}, 1, 100), ValidationError);
}

TEST_CASE("special ids are fixed") {
  const Vocabulary v({"x"});
  CHECK(v.token_of(Vocabulary::kPad) == "[PAD]");
  CHECK(v.token_of(Vocabulary::kUnk) == "[UNK]");
  CHECK(v.token_of(Vocabulary::kCls) == "[CLS]");
  CHECK(v.token_of(Vocabulary::kSep) == "[SEP]");
  CHECK(v.size() == 5);
  CHECK_THROWS_AS(Vocabulary({"[CLS]"}), ValidationError);
  CHECK_THROWS_AS(Vocabulary({"x", "x"}), ValidationError);
}

TEST_CASE("encode pads, maps unknowns and truncates") {
  const Vocabulary v({"a", "b"});
  const auto empty = encode("", v, 5);
  CHECK(empty.ids == std::vector<TokenId>{2, 3, 0, 0, 0});
  CHECK(empty.mask == std::vector<std::uint8_t>{1, 1, 0, 0, 0});

  const auto oov = encode("zzz-unseen", v, 5);
  CHECK(oov.ids[1] == Vocabulary::kUnk);
  CHECK(oov.token_strings ==
        std::vector<std::string>{"[CLS]", "zzz-unseen", "[SEP]"});

  std::string long_text;
  for (int i = 0; i < 200; ++i) long_text += "a ";
  const auto t = encode(long_text, v, 16);
  CHECK(t.length() == 16);
  CHECK(t.real_length() == 16);
  CHECK(t.ids.front() == Vocabulary::kCls);
  CHECK(t.ids.back() == Vocabulary::kSep);
  CHECK(std::count(t.ids.begin(), t.ids.end(), Vocabulary::kPad) == 0);
  CHECK(std::count(t.ids.begin(), t.ids.end(), TokenId{4}) == 14);
}

TEST_CASE("vocabulary JSON round trip") {
  const Vocabulary v({"b", "a", "c"});
  CHECK(Vocabulary::from_json(v.to_json()) == v);
}
