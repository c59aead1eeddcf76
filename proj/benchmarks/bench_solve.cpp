#include <benchmark/benchmark.h>

#include "skembed/embed.hpp"
#include "skembed/order.hpp"
#include "skembed/presets.hpp"

namespace {

using namespace skembed;

// Arg 0: spacing as 1/h, arg 1: symmetry reduction.
void BM_SolveTwoShell3d(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    const auto inst = preset_two_shell(3, h, 4.0, 1.0, 2.0, 3.0, 0.5, 1.0, ObjectiveSense::Minimize);
    const Lattice lat = Lattice::build(inst.lattice);
    EmbeddingOptions eo;
    eo.symmetry_reduction = state.range(1) != 0;
    std::size_t rows = 0;
    for (auto _ : state) {
        auto prob = build_problem(lat, inst.mu, inst.nu, inst.alpha, inst.sense, eo);
        rows = prob.program.num_rows();
        benchmark::DoNotOptimize(solve(prob).objective);
    }
    state.counters["nodes"] = static_cast<double>(lat.size());
    state.counters["rows"] = static_cast<double>(rows);
}
BENCHMARK(BM_SolveTwoShell3d)->Args({1, 1})->Args({2, 1})->Args({1, 0})->Unit(benchmark::kMillisecond);

void BM_SolveUniformShell2d(benchmark::State& state) {
    const auto inst = preset_uniform_shell(2, 0.5, static_cast<double>(state.range(0)), 1.0, 2.0, 1.0,
                                           ObjectiveSense::Minimize);
    const Lattice lat = Lattice::build(inst.lattice);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(build_problem(lat, inst.mu, inst.nu, inst.alpha, inst.sense)).objective);
    }
    state.counters["nodes"] = static_cast<double>(lat.size());
}
BENCHMARK(BM_SolveUniformShell2d)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_OrderPotential(benchmark::State& state) {
    const auto inst = preset_two_shell(3, 0.5, 4.0, 1.0, 2.0, 3.0, 0.5, 1.0, ObjectiveSense::Minimize);
    const Lattice lat = Lattice::build(inst.lattice);
    for (auto _ : state) benchmark::DoNotOptimize(check_order_potential(lat, inst.mu, inst.nu).in_order);
    state.counters["nodes"] = static_cast<double>(lat.size());
}
BENCHMARK(BM_OrderPotential)->Unit(benchmark::kMillisecond);

}  // namespace
