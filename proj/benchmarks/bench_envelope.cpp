#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "skembed/envelope.hpp"

namespace {

using namespace skembed;

std::vector<double> noise(const Lattice& lat) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> f(lat.size());
    for (auto& v : f) v = u(rng);
    return f;
}

void BM_ShellEnvelope(benchmark::State& state) {
    const Lattice lat = build_lattice(static_cast<int>(state.range(0)), 1.0, static_cast<double>(state.range(1)));
    const auto f = noise(lat);
    for (auto _ : state) benchmark::DoNotOptimize(envelope_iterate(lat, f).iterations);
    state.counters["nodes"] = static_cast<double>(lat.size());
}
BENCHMARK(BM_ShellEnvelope)->Args({2, 6})->Args({3, 3})->Unit(benchmark::kMillisecond);

void BM_OneStepEnvelope(benchmark::State& state) {
    const Lattice lat = build_lattice(static_cast<int>(state.range(0)), 0.5, static_cast<double>(state.range(1)));
    const auto f = noise(lat);
    for (auto _ : state) benchmark::DoNotOptimize(envelope_onestep_oracle(lat, f).iterations);
    state.counters["nodes"] = static_cast<double>(lat.size());
}
BENCHMARK(BM_OneStepEnvelope)->Args({2, 6})->Args({3, 3})->Unit(benchmark::kMillisecond);

}  // namespace
