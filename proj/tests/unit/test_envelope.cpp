#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "skembed/embed.hpp"
#include "skembed/envelope.hpp"
#include "skembed/error.hpp"
#include "skembed/lp.hpp"
#include "skembed/presets.hpp"

namespace skembed {
namespace {

using testing::Rng;
using testing::lp_envelope;
using testing::max_abs_diff;

std::vector<double> grid(const Lattice& lat, auto&& fn) {
    std::vector<double> f(lat.size());
    for (std::size_t z = 0; z < lat.size(); ++z) f[z] = fn(lat.node(z));
    return f;
}

double sq(const Point& z) { return double(z[0]) * z[0] + double(z[1]) * z[1] + double(z[2]) * z[2]; }

TEST(SphereAverage, Examples) {
    const Lattice lat = build_lattice(2, 1.0, 5.0, 0.1);
    const std::size_t x = *lat.index_of({1, 0, 0});
    const auto c = grid(lat, [](const Point&) { return 3.5; });
    const auto coord = grid(lat, [](const Point& z) { return double(z[0]); });
    const auto dist2 = grid(lat, [](const Point& z) { return sq({z[0] - 1, z[1], z[2]}); });
    for (double r : admissible_radii(lat, x)) {
        EXPECT_NEAR(sphere_average(lat, c, x, r), 3.5, 1e-14);
        EXPECT_NEAR(sphere_average(lat, coord, x, r), 1.0, 1e-14);
    }
    EXPECT_NEAR(sphere_average(lat, dist2, x, 1.0), 1.0, 1e-14);
    EXPECT_EQ(sphere_average(lat, coord, x, 0.0), 1.0);
}

TEST(SphereAverage, Errors) {
    const Lattice lat = build_lattice(2, 1.0, 3.0, 0.1);
    const auto f = grid(lat, [](const Point&) { return 0.0; });
    try {
        sphere_average(lat, f, *lat.index_of({2, 0, 0}), 2.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BallEscapesDomain);
    }
    try {
        sphere_average(lat, f, *lat.index_of({0, 0, 0}), 1.7);  // no lattice point at distance 1.7
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyShell);
    }
}

TEST(ShellEnvelope, FixedPoints) {
    const Lattice lat = build_lattice(2, 1.0, 4.0);
    const auto quad = grid(lat, sq);
    const auto r = envelope_iterate(lat, quad);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(max_abs_diff(r.values, quad), 0.0);
    const auto c = grid(lat, [](const Point&) { return -2.0; });
    EXPECT_EQ(max_abs_diff(envelope_iterate(lat, c).values, c), 0.0);
}

TEST(ShellEnvelope, TracksOneStepEnvelopeOfCone) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    const auto f = grid(lat, [](const Point& z) { return -std::sqrt(sq(z)); });
    const auto shell = envelope_iterate(lat, f);
    const auto onestep = envelope_onestep_oracle(lat, f);
    EXPECT_TRUE(shell.converged);
    EXPECT_LE(max_abs_diff(shell.values, onestep.values), 10.0 * 1.0 * 1.0);
}

TEST(ShellEnvelope, PropertiesOnRandomFunctions) {
    Rng rng(31);
    for (int d : {2, 3}) {
        const Lattice lat = build_lattice(d, 1.0, d == 2 ? 4.0 : 3.0);
        for (int t = 0; t < 5; ++t) {
            std::vector<double> f(lat.size()), g(lat.size());
            for (std::size_t z = 0; z < lat.size(); ++z) {
                f[z] = rng.uniform(-1, 1);
                g[z] = f[z] + rng.uniform(0, 0.5);  // g >= f
            }
            const auto ef = envelope_iterate(lat, f);
            const auto eg = envelope_iterate(lat, g);
            EXPECT_TRUE(ef.converged);
            EXPECT_TRUE(ef.monotone);
            for (std::size_t z = 0; z < lat.size(); ++z) {
                EXPECT_LE(ef.values[z], f[z]);
                EXPECT_LE(ef.values[z], eg.values[z] + 1e-10);
                for (double r : admissible_radii(lat, z)) {
                    EXPECT_LE(ef.values[z], sphere_average(lat, ef.values, z, r) + 1e-10);
                }
            }
            const auto again = envelope_iterate(lat, ef.values);
            EXPECT_LE(max_abs_diff(again.values, ef.values), 1e-10);
        }
    }
}

TEST(OneStepEnvelope, Examples) {
    const Lattice lat = build_lattice(2, 1.0, 2.9);  // 5x5 window clipped to a disk
    const auto quad = grid(lat, sq);
    EXPECT_LE(max_abs_diff(envelope_onestep_oracle(lat, quad).values, quad), 1e-12);
    const auto spike = grid(lat, [](const Point& z) { return sq(z) == 0 ? 1.0 : 0.0; });
    const auto g = envelope_onestep_oracle(lat, spike).values;
    for (double v : g) EXPECT_NEAR(v, 0.0, 1e-12);
    EXPECT_LE(max_abs_diff(g, lp_envelope(lat, spike)), 1e-8);
    const auto c = grid(lat, [](const Point&) { return 0.75; });
    EXPECT_LE(max_abs_diff(envelope_onestep_oracle(lat, c).values, c), 1e-14);
}

TEST(OneStepEnvelope, MatchesLpOracle) {
    Rng rng(32);
    for (const auto& lat : {build_lattice(2, 1.0, 5.0), build_lattice(3, 1.0, 2.5), build_lattice(2, 0.5, 3.5)}) {
        ASSERT_LE(lat.size(), 200u);
        for (int t = 0; t < 4; ++t) {
            std::vector<double> f(lat.size());
            for (auto& v : f) v = rng.uniform(-1, 1);
            const auto g = envelope_onestep_oracle(lat, f);
            EXPECT_TRUE(g.converged);
            EXPECT_LE(max_abs_diff(g.values, lp_envelope(lat, f)), 1e-8);
            EXPECT_LE(subharmonic_violation(lat, g.values), 1e-12);
            for (std::size_t z = 0; z < lat.size(); ++z) EXPECT_LE(g.values[z], f[z]);
            const auto again = envelope_onestep_oracle(lat, g.values);
            EXPECT_LE(max_abs_diff(again.values, g.values), 1e-10);
        }
    }
}

TEST(ValueFunction, ZeroRewardStopsAtOnce) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    const std::vector<double> beta(lat.size(), 0.0);
    const std::size_t x = *lat.index_of({1, 0, 0});
    for (double alpha : {0.5, 1.0, 3.0}) {
        const auto j = value_function(lat, beta, x, alpha, ObjectiveSense::Minimize);
        EXPECT_NEAR(j[x], 0.0, 1e-12);
        for (std::size_t z = 0; z < lat.size(); ++z) {
            EXPECT_GE(j[z], -transport_cost(lat.node(x), lat.node(z), alpha, 1.0) - 1e-12);
        }
    }
}

TEST(ValueFunction, ZeroCostMajorantOfQuadratic) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    const auto beta = grid(lat, sq);
    const std::size_t x = *lat.index_of({0, 0, 0});
    const auto j = value_function(lat, beta, x, 1.0, ObjectiveSense::Minimize, true);
    // Oracle: -(largest subharmonic minorant of -beta) by LP.
    auto neg = beta;
    for (double& v : neg) v = -v;
    const auto oracle = lp_envelope(lat, neg);
    for (std::size_t z = 0; z < lat.size(); ++z) EXPECT_NEAR(j[z], -oracle[z], 1e-8);
    EXPECT_GT(j[x], beta[x]);  // continuing to the boundary beats stopping at the origin
}

// Value functions of the dual potentials reproduce the dual per-start values.
TEST(ValueFunction, BridgesToEmbeddingDuals) {
    std::vector<Instance> cases = {
        preset_uniform_shell(2, 0.5, 3.0, 1.0, 2.0, 1.0, ObjectiveSense::Minimize),
        preset_uniform_shell(2, 0.5, 3.0, 1.0, 2.0, 3.0, ObjectiveSense::Maximize),
        preset_two_shell(3, 1.0, 4.0, 1.0, 1.5, 2.5, 0.5, 0.5, ObjectiveSense::Minimize),
    };
    for (const auto& inst : cases) {
        const Lattice lat = Lattice::build(inst.lattice);
        EmbeddingOptions eo;
        eo.symmetry_reduction = true;
        const auto sol = solve(build_problem(lat, inst.mu, inst.nu, inst.alpha, inst.sense, eo));
        ASSERT_EQ(sol.status, LpStatus::Optimal);
        const bool is_min = inst.sense == ObjectiveSense::Minimize;
        for (const auto& st : sol.starts) {
            const auto v = value_function(lat, sol.beta, st.node, inst.alpha, inst.sense);
            EXPECT_NEAR(v[st.node], st.value[st.node], 1e-8);
            // The dual J_x is feasible, so it dominates the extremal value function.
            for (std::size_t z = 0; z < lat.size(); ++z) {
                if (is_min) EXPECT_GE(st.value[z], v[z] - 1e-8);
                else EXPECT_LE(st.value[z], v[z] + 1e-8);
            }
        }
    }
}

}  // namespace
}  // namespace skembed
