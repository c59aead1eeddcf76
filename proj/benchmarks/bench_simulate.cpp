#include <benchmark/benchmark.h>

#include "skembed/barrier.hpp"
#include "skembed/embed.hpp"
#include "skembed/mc.hpp"
#include "skembed/presets.hpp"

namespace {

using namespace skembed;

struct Fixture {
    Instance inst = preset_two_shell(3, 1.0, 5.0, 1.0, 2.0, 3.0, 0.5, 1.0, ObjectiveSense::Minimize);
    Lattice lat = Lattice::build(inst.lattice);
    BarrierPolicy policy;

    Fixture() {
        EmbeddingOptions eo;
        eo.symmetry_reduction = true;
        policy = build_policy(solve(build_problem(lat, inst.mu, inst.nu, inst.alpha, inst.sense, eo)), lat);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

// Arg: worker threads. Items are simulated paths.
void BM_Simulate(benchmark::State& state) {
    const auto& f = fixture();
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate(f.policy, f.lat, f.inst.mu, cfg).mean_steps);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.n_paths));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_ReplayPolicy(benchmark::State& state) {
    const auto& f = fixture();
    const auto& sp = f.policy.starts.front();
    for (auto _ : state) benchmark::DoNotOptimize(replay_policy(f.lat, sp.start, sp.rho).stop.data());
}
BENCHMARK(BM_ReplayPolicy)->Unit(benchmark::kMicrosecond);

}  // namespace
