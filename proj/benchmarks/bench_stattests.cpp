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

#include "biaslab/stattests.hpp"

namespace {

void BM_Chi2Sf(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(biaslab::chi2_sf(x, 1));
    x = x > 50.0 ? 0.0 : x + 0.37;
  }
}
BENCHMARK(BM_Chi2Sf);

void BM_TSfTwoTailed(benchmark::State& state) {
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(biaslab::t_sf_two_tailed(t, 5));
    t = t > 20.0 ? 0.0 : t + 0.13;
  }
}
BENCHMARK(BM_TSfTwoTailed);

void BM_FiveByTwo(benchmark::State& state) {
  std::array<std::array<double, 2>, 5> d{};
  for (std::size_t i = 0; i < 5; ++i) d[i] = {0.01 * static_cast<double>(i + 1), 0.02};
  for (auto _ : state) benchmark::DoNotOptimize(biaslab::five_by_two_ttest(d));
}
BENCHMARK(BM_FiveByTwo);

}  // namespace

BENCHMARK_MAIN();
