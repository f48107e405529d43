/*
   Copyright 2026 The ldlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Serial reference against OpenMP kernels.

#include <benchmark/benchmark.h>

#include "ldlab/kernels.hpp"
#include "ldlab/maps.hpp"

namespace {

using ldlab::maps::MapSystem;
using ldlab::maps::Observable;

void BM_UlamRowsSerial(benchmark::State& state) {
    const auto map = MapSystem::intermittent(0.5);
    const auto k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ldlab::kernels::ulam_rows_serial(map, k));
}

void BM_UlamRowsOmp(benchmark::State& state) {
    const auto map = MapSystem::intermittent(0.5);
    const auto k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ldlab::kernels::ulam_rows_omp(map, k, 0));
}

ldlab::kernels::BirkhoffJob job(const MapSystem& map, const Observable& obs, std::size_t samples) {
    ldlab::kernels::BirkhoffJob j;
    j.map = &map;
    j.obs = &obs;
    j.checkpoints = {10, 100, 1000};
    j.samples = samples;
    j.burn_in = 1000;
    j.seed = 42;
    return j;
}

void BM_BirkhoffSerial(benchmark::State& state) {
    const auto map = MapSystem::doubling();
    const auto obs = Observable::cosine();
    const auto j = job(map, obs, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ldlab::kernels::birkhoff_sums_serial(j));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

void BM_BirkhoffOmp(benchmark::State& state) {
    const auto map = MapSystem::doubling();
    const auto obs = Observable::cosine();
    const auto j = job(map, obs, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ldlab::kernels::birkhoff_sums_omp(j, 0));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

}  // namespace

BENCHMARK(BM_UlamRowsSerial)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UlamRowsOmp)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BirkhoffSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BirkhoffOmp)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
