#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "generators.hpp"
#include "skembed/barrier.hpp"
#include "skembed/error.hpp"
#include "skembed/presets.hpp"

namespace skembed {
namespace {

// Dense oracle: law of the first node with |z| >= radius (or the boundary) for the walk from x.
std::vector<double> dense_exit_law(const Lattice& lat, std::size_t x, double radius) {
    const int n = static_cast<int>(lat.size());
    auto stops = [&](std::size_t z) { return !lat.is_interior(z) || lat.norm(z) >= radius - 1e-12; };
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t z = 0; z < lat.size(); ++z) {
        if (stops(z)) continue;
        const auto nb = lat.neighbors(z);
        for (std::size_t w : nb) a(static_cast<int>(w), static_cast<int>(z)) -= 1.0 / static_cast<double>(nb.size());
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[static_cast<int>(x)] = 1.0;
    const Eigen::VectorXd arrivals = a.partialPivLu().solve(e);
    std::vector<double> law(lat.size(), 0.0);
    for (std::size_t z = 0; z < lat.size(); ++z) {
        if (stops(z)) law[z] = arrivals[static_cast<int>(z)];
    }
    return law;
}

StoppingSolution solve_reduced(const Instance& inst, const Lattice& lat) {
    EmbeddingOptions eo;
    eo.symmetry_reduction = true;
    return solve(build_problem(lat, inst.mu, inst.nu, inst.alpha, inst.sense, eo));
}

TEST(Replay, ExitRuleMatchesDenseOracle) {
    const Lattice lat = build_lattice(2, 1.0, 4.0);
    const auto rho = exit_rule(lat, 2.5);
    for (const Point& x : {Point{0, 0, 0}, Point{1, 1, 0}, Point{2, 0, 0}}) {
        const std::size_t xi = *lat.index_of(x);
        const auto r = replay_policy(lat, xi, rho);
        const auto oracle = dense_exit_law(lat, xi, 2.5);
        double total = 0.0;
        for (std::size_t z = 0; z < lat.size(); ++z) {
            EXPECT_NEAR(r.stop[z], oracle[z], 1e-12);
            total += r.stop[z];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Replay, RejectsBadProbabilities) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    std::vector<double> rho(lat.size(), 0.5);
    const std::size_t origin = *lat.index_of({0, 0, 0});
    rho[origin] = 1.5;
    EXPECT_THROW(replay_policy(lat, origin, rho), Error);
}

TEST(Regime, Mapping) {
    EXPECT_EQ(regime_for(ObjectiveSense::Minimize, 1.0), CapRegime::MinAlphaLt2);
    EXPECT_EQ(regime_for(ObjectiveSense::Maximize, 3.0), CapRegime::MaxAlphaGt2);
    EXPECT_EQ(regime_for(ObjectiveSense::Minimize, 3.0), CapRegime::MinAlphaGt2);
    EXPECT_EQ(regime_for(ObjectiveSense::Maximize, 0.5), CapRegime::MaxAlphaLt2);
    EXPECT_TRUE(cap_points_toward(CapRegime::MinAlphaLt2));
    EXPECT_TRUE(cap_points_toward(CapRegime::MaxAlphaGt2));
    EXPECT_FALSE(cap_points_toward(CapRegime::MinAlphaGt2));
    EXPECT_FALSE(cap_points_toward(CapRegime::MaxAlphaLt2));
    for (CapRegime r : {CapRegime::MinAlphaLt2, CapRegime::MaxAlphaGt2, CapRegime::MinAlphaGt2, CapRegime::MaxAlphaLt2}) {
        EXPECT_EQ(parse_regime(to_string(r)), r);
    }
    try {
        regime_for(ObjectiveSense::Minimize, 2.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WrongRegime);
    }
}

TEST(Policy, ReplayReproducesSolution) {
    const auto inst = preset_two_shell(2, 0.5, 3.0, 1.0, 1.5, 2.5, 0.5, 1.0, ObjectiveSense::Minimize);
    const Lattice lat = Lattice::build(inst.lattice);
    const auto sol = solve_reduced(inst, lat);
    const auto policy = build_policy(sol, lat);
    EXPECT_EQ(policy.starts.size(), sol.starts.size());
    for (const auto& sp : policy.starts) {
        for (std::size_t z = 0; z < lat.size(); ++z) {
            EXPECT_GE(sp.rho[z], 0.0);
            EXPECT_LE(sp.rho[z], 1.0);
            if (!lat.is_interior(z)) EXPECT_EQ(sp.rho[z], 1.0);
        }
    }
    EXPECT_LE(replay_error(policy, sol, lat), 1e-8);
}

TEST(Policy, RadialExitRuleIsNotRandomized) {
    const auto inst = preset_uniform_shell(2, 0.5, 3.0, 1.0, 2.0, 1.0, ObjectiveSense::Minimize);
    const Lattice lat = Lattice::build(inst.lattice);
    const auto sol = solve_reduced(inst, lat);
    const auto policy = build_policy(sol, lat);
    const auto prof = randomization_profile(policy, sol, lat);
    const double frac = randomized_fraction(prof, policy);
    EXPECT_GE(frac, 0.0);
    EXPECT_LE(frac, 1.0);
    for (const auto& p : prof) {
        double s = 0.0;
        for (double v : p.per_shell) s += v;
        EXPECT_NEAR(s, p.fraction, 1e-12);
    }
}

TEST(Supports, StopMassSumsToOne) {
    const auto inst = preset_uniform_shell(2, 0.5, 3.0, 1.0, 2.0, 1.0, ObjectiveSense::Minimize);
    const Lattice lat = Lattice::build(inst.lattice);
    const auto sol = solve_reduced(inst, lat);
    const auto sup = extract_supports(sol, lat);
    ASSERT_EQ(sup.size(), sol.starts.size());
    for (std::size_t i = 0; i < sup.size(); ++i) {
        double s = 0.0;
        for (std::size_t z : sup[i].stop) s += sol.starts[i].stop[z];
        EXPECT_NEAR(s, 1.0, 1e-8);
        for (std::size_t z : sup[i].pass) EXPECT_TRUE(lat.is_interior(z));
    }
}

// Mixed-band targets put stop and pass mass on the same shell, so the cap test has content.
class CapStructure : public ::testing::TestWithParam<std::pair<double, ObjectiveSense>> {};

TEST_P(CapStructure, PredictedRegimeHoldsAndReversedFails) {
    const auto [alpha, sense] = GetParam();
    const auto inst = preset_two_shell(3, 1.0, 5.0, 1.0, 2.0, 3.0, 0.5, alpha, sense);
    const Lattice lat = Lattice::build(inst.lattice);
    const auto sol = solve_reduced(inst, lat);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    const auto regime = regime_for(sense, alpha);
    const auto cap = verify_cap_structure(sol, lat, regime);
    EXPECT_FALSE(cap.advisory);
    EXPECT_EQ(cap.violations(), 0u);
    std::size_t mixed = 0;
    for (const auto& row : cap.rows) mixed += row.stop_count > 0 && row.pass_count > 0;
    EXPECT_GT(mixed, 0u) << "no shell carries both stop and pass mass";
    for (const auto& st : sol.starts) EXPECT_TRUE(forbidden_pairs(sol, lat, st.node, regime).empty());

    const auto reversed = sense == ObjectiveSense::Minimize ? ObjectiveSense::Maximize : ObjectiveSense::Minimize;
    const auto wrong = verify_cap_structure(sol, lat, regime_for(reversed, alpha));
    EXPECT_GT(wrong.violations(), 0u);
}

INSTANTIATE_TEST_SUITE_P(TwoShell3d, CapStructure,
                         ::testing::Values(std::pair{1.0, ObjectiveSense::Minimize},
                                           std::pair{3.0, ObjectiveSense::Maximize},
                                           std::pair{0.5, ObjectiveSense::Maximize}));

TEST(CapStructure2d, IsAdvisory) {
    const auto inst = preset_two_shell(2, 0.5, 3.0, 1.0, 1.5, 2.5, 0.5, 1.0, ObjectiveSense::Minimize);
    const Lattice lat = Lattice::build(inst.lattice);
    const auto cap = verify_cap_structure(solve_reduced(inst, lat), lat, CapRegime::MinAlphaLt2);
    EXPECT_TRUE(cap.advisory);
}

TEST(CapStructure2d, OriginStartIsRejected) {
    const auto inst = preset_uniform_shell(2, 1.0, 3.0, 0.0, 2.0, 1.0, ObjectiveSense::Minimize);
    const Lattice lat = Lattice::build(inst.lattice);
    try {
        verify_cap_structure(solve_reduced(inst, lat), lat, CapRegime::MinAlphaLt2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroStart);
    }
}

TEST(CommonMass, StaysPutForMinAndRejectsOtherRegimes) {
    const auto inst = preset_overlap_pair(2, 0.5, 3.0, 0.0, 1.0, 2.0, 1.0);
    const Lattice lat = Lattice::build(inst.lattice);
    const auto sol = solve_reduced(inst, lat);
    const auto cm = common_mass_check(sol, lat, inst.mu, inst.nu);
    EXPECT_TRUE(cm.pass) << cm.worst_deficit;
    EXPECT_FALSE(common_mass(inst.mu, inst.nu).empty());

    const auto mx = solve_reduced(Instance{inst.name, inst.lattice, inst.mu, inst.nu, 1.0, ObjectiveSense::Maximize}, lat);
    EXPECT_THROW(common_mass_check(mx, lat, inst.mu, inst.nu), Error);
}

}  // namespace
}  // namespace skembed
