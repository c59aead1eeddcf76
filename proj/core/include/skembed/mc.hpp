#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "skembed/barrier.hpp"
#include "skembed/lattice.hpp"
#include "skembed/measures.hpp"

namespace skembed {

struct SimConfig {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 0;
    std::size_t max_steps = 0;               // 0: 100 (R_O / h)^2
    std::optional<std::size_t> fixed_start;  // node index; otherwise starts are drawn from mu
    unsigned threads = 1;
    std::size_t trace_paths = 0;             // per-step trace of the first paths, at most 10^4
};

struct TraceRow {
    std::size_t path_id = 0;
    std::size_t step = 0;
    Point z{};
    bool stopped = false;
};

struct SimReport {
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::size_t max_steps = 0;
    std::vector<std::uint64_t> counts;  // terminal hits per node, capped paths excluded
    DiscreteMeasure terminal;           // counts / completed paths
    double mean_steps = 0.0;
    double step_variance = 0.0;         // unbiased, over completed paths
    std::uint64_t capped = 0;
    bool cap_flag = false;              // capped >= 0.1% of paths
    std::vector<double> shell_histogram;
    std::vector<TraceRow> trace;
};

/// Replays the policy: each path draws its start, then repeatedly stops with
/// probability rho at the current node (always on the boundary) or takes a kernel step.
/// Path i uses its own generator seeded from (seed, i), and counts are integers merged
/// in path order, so the report does not depend on `threads`.
/// Throws PolicyGap if a start has no stop rule.
SimReport simulate(const BarrierPolicy& policy, const Lattice& lattice, const DiscreteMeasure& start_law,
                   const SimConfig& config);

struct Comparison {
    bool pass = false;
    double distance = 0.0;  // W1, physical units
    double bound = 0.0;
};

/// 3-sigma multinomial envelope for W1 between an n-sample empirical law and `target`:
/// diam * (1/2) * 3 * sum_z sqrt(p(z)(1 - p(z)) / n), diam over the union of supports.
double multinomial_envelope(const DiscreteMeasure& target, const DiscreteMeasure& empirical, std::size_t n, double h);

/// pass iff W1(report.terminal, target) <= envelope. Throws MassMismatch if totals differ.
Comparison compare(const SimReport& report, const DiscreteMeasure& target, double h);

/// True if |mean_steps - expected| <= 3 sqrt(step_variance / completed paths).
bool mean_steps_consistent(const SimReport& report, double expected);

}  // namespace skembed
