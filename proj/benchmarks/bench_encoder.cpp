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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "biaslab/corpus.hpp"
#include "biaslab/encoder.hpp"
#include "biaslab/trainer.hpp"

namespace {

struct Fixture {
  biaslab::Model model;
  std::vector<biaslab::TokenSequence> batch;
  biaslab::Matrix targets;
};

Fixture make_fixture(std::size_t d_model, std::size_t batch_size) {
  biaslab::SyntheticOptions o;
  o.n = batch_size;
  o.seed = 1;
  o.bias_lexicon = biaslab::default_bias_lexicon();
  o.neutral_lexicon = biaslab::default_neutral_lexicon();
  const auto corpus = biaslab::generate_synthetic(o);
  Fixture f;
  f.model.vocab = biaslab::build_vocab(corpus, 1, 30000);
  f.model.config.vocab_size = f.model.vocab.size();
  f.model.config.d_model = d_model;
  f.model.config.n_heads = 4;
  f.model.config.d_ff = 4 * d_model;
  f.model.config.max_len = 32;
  f.model.params = biaslab::init_params(f.model.config, 2);
  const auto texts = corpus.texts();
  f.batch = biaslab::encode_batch(texts, f.model.vocab, f.model.config.max_len);
  f.targets = biaslab::one_hot(corpus.labels());
  return f;
}


void BM_ForwardEval(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(biaslab::forward(f.model.params, f.model.config, f.batch));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.batch.size()));
}
BENCHMARK(BM_ForwardEval)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 32);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        biaslab::backward(f.model.params, f.model.config, f.batch, f.targets, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.batch.size()));
}
BENCHMARK(BM_Backward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Tokenize(benchmark::State& state) {
  const std::string text =
      "The senator's reckless, disgraceful remarks shocked the calm committee today.";
  for (auto _ : state) benchmark::DoNotOptimize(biaslab::tokenize(text));
}
BENCHMARK(BM_Tokenize);

}  // namespace

BENCHMARK_MAIN();
