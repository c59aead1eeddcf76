#include "skembed/mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "skembed/error.hpp"

namespace skembed {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Tally {
    std::vector<std::uint64_t> counts;
    std::uint64_t steps = 0;
    std::uint64_t steps_sq = 0;
    std::uint64_t completed = 0;
    std::uint64_t capped = 0;
};

}  // namespace

SimReport simulate(const BarrierPolicy& policy, const Lattice& lattice, const DiscreteMeasure& start_law,
                   const SimConfig& config) {
    if (config.n_paths == 0) throw Error(ErrorCode::InvalidArgument, "n_paths must be at least 1");
    const std::size_t n = lattice.size();
    const double span = lattice.outer_radius() / lattice.spacing();
    const std::size_t floor_steps = static_cast<std::size_t>(std::ceil(100.0 * span * span));
    const std::size_t max_steps = config.max_steps == 0 ? floor_steps : config.max_steps;
    if (max_steps < floor_steps) {
        throw Error(ErrorCode::InvalidArgument, "max_steps must be at least 100 (R_O/h)^2");
    }

    // Start sampler: cumulative weights over start nodes with their stop rules.
    std::vector<std::size_t> start_nodes;
    std::vector<double> cumulative;
    if (config.fixed_start) {
        start_nodes.push_back(*config.fixed_start);
        cumulative.push_back(1.0);
    } else {
        if (start_law.empty()) throw Error(ErrorCode::EmptyMeasure, "start law is empty");
        double acc = 0.0;
        for (const auto& a : start_law.atoms()) {
            const auto idx = lattice.index_of(a.z);
            if (!idx) throw Error(ErrorCode::SupportOffLattice, "start outside the domain");
            start_nodes.push_back(*idx);
            acc += a.m;
            cumulative.push_back(acc);
        }
        for (double& c : cumulative) c /= acc;
    }
    std::vector<const std::vector<double>*> rules;
    for (std::size_t s : start_nodes) {
        const StartPolicy* sp = policy.find(s);
        if (sp == nullptr || sp->rho.size() != n) {
            throw Error(ErrorCode::PolicyGap, "no stop rule for start node " + std::to_string(s));
        }
        rules.push_back(&sp->rho);
    }

    const std::size_t n_trace = std::min<std::size_t>(config.trace_paths, 10000);
    std::vector<std::vector<TraceRow>> traces(std::min(n_trace, config.n_paths));

    auto run_range = [&](std::size_t begin, std::size_t end, Tally& t) {
        t.counts.assign(n, 0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t path = begin; path < end; ++path) {
            std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(path)));
            std::size_t k = 0;
            if (start_nodes.size() > 1) {
                const double u = unit(rng);
                k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                             cumulative.begin());
                k = std::min(k, start_nodes.size() - 1);
            }
            const std::vector<double>& rho = *rules[k];
            std::size_t z = start_nodes[k];
            std::size_t steps = 0;
            bool done = false;
            std::vector<TraceRow>* trace = path < traces.size() ? &traces[path] : nullptr;
            while (steps <= max_steps) {
                bool stop = !lattice.is_interior(z) || rho[z] >= 1.0;
                if (!stop && rho[z] > 0.0) stop = unit(rng) < rho[z];
                if (trace) trace->push_back({path, steps, lattice.node(z), stop});
                if (stop) {
                    done = true;
                    break;
                }
                if (steps == max_steps) break;
                const auto nb = lattice.neighbors(z);
                std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
                z = nb[pick(rng)];
                ++steps;
            }
            if (!done) {
                ++t.capped;
                continue;
            }
            ++t.counts[z];
            ++t.completed;
            t.steps += steps;
            t.steps_sq += static_cast<std::uint64_t>(steps) * steps;
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.n_paths)));
    std::vector<Tally> tallies(n_threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (config.n_paths + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
        const std::size_t b = std::min(config.n_paths, t * chunk);
        const std::size_t e = std::min(config.n_paths, b + chunk);
        if (t + 1 == n_threads) {
            run_range(b, e, tallies[t]);
        } else {
            pool.emplace_back(run_range, b, e, std::ref(tallies[t]));
        }
    }
    for (auto& th : pool) th.join();

    // Integer merge: order-independent, hence identical for every thread count.
    Tally total;
    total.counts.assign(n, 0);
    for (const auto& t : tallies) {
        for (std::size_t z = 0; z < n; ++z) total.counts[z] += t.counts[z];
        total.steps += t.steps;
        total.steps_sq += t.steps_sq;
        total.completed += t.completed;
        total.capped += t.capped;
    }

    SimReport rep;
    rep.n_paths = config.n_paths;
    rep.seed = config.seed;
    rep.max_steps = max_steps;
    rep.counts = total.counts;
    rep.capped = total.capped;
    rep.cap_flag = static_cast<double>(total.capped) >= 1e-3 * static_cast<double>(config.n_paths);
    rep.shell_histogram.assign(lattice.shells().size(), 0.0);
    if (total.completed > 0) {
        const double c = static_cast<double>(total.completed);
        std::vector<double> law(n);
        for (std::size_t z = 0; z < n; ++z) {
            law[z] = static_cast<double>(total.counts[z]) / c;
            rep.shell_histogram[lattice.shell_of(z)] += law[z];
        }
        rep.terminal = DiscreteMeasure::from_nodes(lattice, law);
        rep.mean_steps = static_cast<double>(total.steps) / c;
        if (total.completed > 1) {
            const long double s = total.steps;
            const long double s2 = total.steps_sq;
            const long double var = (s2 - s * s / c) / (c - 1.0L);
            rep.step_variance = static_cast<double>(std::max(0.0L, var));
        }
    }
    for (auto& tr : traces) rep.trace.insert(rep.trace.end(), tr.begin(), tr.end());
    return rep;
}

double multinomial_envelope(const DiscreteMeasure& target, const DiscreteMeasure& empirical, std::size_t n,
                            double h) {
    std::vector<Point> pts;
    for (const auto& a : target.atoms()) pts.push_back(a.z);
    for (const auto& a : empirical.atoms()) pts.push_back(a.z);
    double diam = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, physical_distance(pts[i], pts[j], h));
    }
    double sigma = 0.0;
    const double total = target.total();
    for (const auto& a : target.atoms()) {
        const double p = a.m / total;
        sigma += std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    }
    return diam * 0.5 * 3.0 * sigma;
}

Comparison compare(const SimReport& report, const DiscreteMeasure& target, double h) {
    if (std::abs(report.terminal.total() - target.total()) > 1e-9) {
        throw Error(ErrorCode::MassMismatch, "empirical and target totals differ");
    }
    Comparison c;
    c.distance = wasserstein1(report.terminal, target, h);
    const std::size_t completed = report.n_paths - static_cast<std::size_t>(report.capped);
    c.bound = multinomial_envelope(target, report.terminal, std::max<std::size_t>(completed, 1), h);
    c.pass = c.distance <= c.bound;
    return c;
}

bool mean_steps_consistent(const SimReport& report, double expected) {
    const double completed = static_cast<double>(report.n_paths - report.capped);
    if (completed <= 0.0) return false;
    return std::abs(report.mean_steps - expected) <= 3.0 * std::sqrt(report.step_variance / completed) + 1e-12;
}

}  // namespace skembed
