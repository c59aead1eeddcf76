#include <benchmark/benchmark.h>

#include "skembed/gain.hpp"

namespace {

using namespace skembed;

void BM_GainBounds(benchmark::State& state) {
    const Lattice lat = Lattice::build({static_cast<int>(state.range(0)), 0.5, 3.0, 0.5, 0.0});
    const std::size_t y = *lat.index_of({2, 0, 0});
    const auto prof = point_profile(lat, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(gain_bounds(lat, {4, 3, 0}, y, prof, 1.0).lower);
}
BENCHMARK(BM_GainBounds)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_MonotonicityScan2d(benchmark::State& state) {
    const Lattice lat = Lattice::build({2, 0.5, 3.0, 0.5, 0.0});
    const std::size_t y = *lat.index_of({2, 0, 0});
    const auto prof = point_profile(lat, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(monotonicity_scan(lat, 2.5, y, prof, 1.0).verdict);
}
BENCHMARK(BM_MonotonicityScan2d)->Unit(benchmark::kMillisecond);

void BM_LaplacianField(benchmark::State& state) {
    double acc = 0.0;
    for (auto _ : state) {
        acc += laplacian_h({0.3, 0.7, -1.1}, 1.0, 3);
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_LaplacianField);

}  // namespace
