// Copyright 2026 nestmatch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "nestmatch/kernels.h"

namespace {

nm::Nest make_nest(std::uint32_t side) { return nm::Nest::lattice(nm::surface_code_like_spec(side, side, side, 0.001)); }

std::vector<nm::Instance> make_batch(const nm::Nest& nest, std::size_t count) {
    std::vector<nm::Instance> batch(count);
    for (std::size_t i = 0; i < count; i++)
        batch[i].events = nm::detection_events(nest, nm::sample_errors(nest, nm::derive_seed(99, i)));
    return batch;
}

void BM_ClusterHistogramSerial(benchmark::State& state) {
    nm::Nest nest = make_nest(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(nm::cluster_histogram_serial(nest, 0.001, 64, 7));
    state.SetItemsProcessed(state.iterations() * 64);
}

void BM_ClusterHistogramParallel(benchmark::State& state) {
    nm::Nest nest = make_nest(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(nm::cluster_histogram_parallel(nest, 0.001, 64, 7));
    state.SetItemsProcessed(state.iterations() * 64);
}

void BM_MatchBatchSerial(benchmark::State& state) {
    nm::Nest nest = make_nest(static_cast<std::uint32_t>(state.range(0)));
    auto batch = make_batch(nest, 32);
    for (auto _ : state) benchmark::DoNotOptimize(nm::match_batch_serial(nest, batch));
    state.SetItemsProcessed(state.iterations() * 32);
}

void BM_MatchBatchParallel(benchmark::State& state) {
    nm::Nest nest = make_nest(static_cast<std::uint32_t>(state.range(0)));
    auto batch = make_batch(nest, 32);
    for (auto _ : state) benchmark::DoNotOptimize(nm::match_batch_parallel(nest, batch));
    state.SetItemsProcessed(state.iterations() * 32);
}

}  // namespace

BENCHMARK(BM_ClusterHistogramSerial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClusterHistogramParallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatchBatchSerial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatchBatchParallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
