#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "skembed/order.hpp"

namespace skembed {
namespace {

using testing::Rng;
using testing::random_pair;

DiscreteMeasure origin_neighbors(int d) {
    std::vector<Atom> a;
    for (int i = 0; i < d; ++i) {
        for (int s : {-1, 1}) {
            Point z{0, 0, 0};
            z[i] = s;
            a.push_back({z, 1.0 / (2.0 * d)});
        }
    }
    return DiscreteMeasure(a);
}

void expect_verified_witness(const Lattice& lat, const OrderVerdict& v, const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu) {
    ASSERT_EQ(v.witness.size(), lat.size());
    const auto wc = check_witness(lat, v.witness, mu, nu);
    EXPECT_TRUE(wc.valid) << "residual " << wc.subharmonic_residual << " violation " << wc.violation;
    EXPECT_LE(wc.subharmonic_residual, 1e-9);
    EXPECT_GT(wc.violation, 1e-10);
}

TEST(Order, DeltaPrecedesOneStepLaw) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    const auto mu = DiscreteMeasure::dirac({0, 0, 0});
    const auto nu = origin_neighbors(2);
    EXPECT_TRUE(check_order_lp(lat, mu, nu).in_order);
    const auto pot = check_order_potential(lat, mu, nu);
    EXPECT_TRUE(pot.in_order);
    // Hand balance: M = delta_0 on interior nodes.
    for (std::size_t z = 0; z < lat.size(); ++z) {
        if (!lat.is_interior(z)) continue;
        EXPECT_NEAR(pot.aggregate[z], lat.node(z) == Point({0, 0, 0}) ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Order, SwappedPairIsNotInOrder) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    const auto mu = origin_neighbors(2);
    const auto nu = DiscreteMeasure::dirac({0, 0, 0});
    const auto lp = check_order_lp(lat, mu, nu);
    const auto pot = check_order_potential(lat, mu, nu);
    EXPECT_FALSE(lp.in_order);
    EXPECT_FALSE(pot.in_order);
    EXPECT_LT(pot.min_aggregate, -1e-10);
    expect_verified_witness(lat, lp, mu, nu);
    expect_verified_witness(lat, pot, mu, nu);
}

TEST(Order, EqualMeasuresAreInOrder) {
    const Lattice lat = build_lattice(3, 1.0, 2.5);
    Rng rng(1);
    const auto mu = testing::random_measure(lat, rng, 4);
    EXPECT_TRUE(check_order_lp(lat, mu, mu).in_order);
    const auto pot = check_order_potential(lat, mu, mu);
    EXPECT_TRUE(pot.in_order);
    for (std::size_t z = 0; z < lat.size(); ++z) {
        if (lat.is_interior(z)) EXPECT_NEAR(pot.aggregate[z], 0.0, 1e-12);
    }
}

TEST(Order, WitnessCheckRejectsNonSubharmonicFunctions) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    std::vector<double> f(lat.size(), 0.0);
    f[*lat.index_of({0, 0, 0})] = 1.0;  // a spike is superharmonic at its peak
    const auto wc = check_witness(lat, f, DiscreteMeasure::dirac({0, 0, 0}), origin_neighbors(2));
    EXPECT_FALSE(wc.valid);
    EXPECT_GT(wc.subharmonic_residual, 0.5);
}

void agreement_sweep(const Lattice& lat, std::uint64_t seed, int pairs) {
    Rng rng(seed);
    int in_order = 0, not_in_order = 0;
    for (int t = 0; t < pairs; ++t) {
        const auto c = random_pair(lat, rng);
        const auto lp = check_order_lp(lat, c.mu, c.nu);
        const auto pot = check_order_potential(lat, c.mu, c.nu);
        EXPECT_EQ(lp.in_order, pot.in_order) << "pair " << t;
        if (c.constructed_in_order) EXPECT_TRUE(lp.in_order) << "pair " << t;
        if (lp.in_order) {
            ++in_order;
        } else {
            ++not_in_order;
            expect_verified_witness(lat, lp, c.mu, c.nu);
            expect_verified_witness(lat, pot, c.mu, c.nu);
        }
    }
    // The sweep is only informative if both verdicts occur.
    EXPECT_GE(in_order, pairs / 4);
    EXPECT_GE(not_in_order, pairs / 4);
}

TEST(OrderAgreement, RandomPairs2d) { agreement_sweep(build_lattice(2, 1.0, 3.0), 21, 60); }
TEST(OrderAgreement, RandomPairs3d) { agreement_sweep(build_lattice(3, 1.0, 2.5), 22, 60); }

TEST(OrderAgreement, DiffusionPreservesOrder) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    Rng rng(23);
    int checked = 0;
    for (int t = 0; t < 40 && checked < 15; ++t) {
        const auto c = random_pair(lat, rng);
        if (!check_order_potential(lat, c.mu, c.nu).in_order) continue;
        std::vector<std::size_t> interior;
        for (const auto& a : c.nu.atoms()) {
            const auto i = lat.index_of(a.z);
            if (lat.is_interior(*i)) interior.push_back(*i);
        }
        if (interior.empty()) continue;
        const auto spread = testing::diffuse_at(lat, c.nu, interior[rng.index(interior.size())]);
        EXPECT_TRUE(check_order_lp(lat, c.mu, spread).in_order);
        EXPECT_TRUE(check_order_potential(lat, c.mu, spread).in_order);
        ++checked;
    }
    EXPECT_GE(checked, 10);
}

TEST(Order, MassOnTheHoleBoundaryCannotMove) {
    // Nodes next to the hole are absorbing on the ring, so mass there cannot move at all.
    const Lattice ball = Lattice::build({2, 1.0, 3.0, -1.0, 0.0});
    const Lattice ring = Lattice::build({2, 1.0, 3.0, -1.0, 1.0});
    const auto mu = DiscreteMeasure(std::vector<Atom>{{{1, 0, 0}, 0.5}, {{-1, 0, 0}, 0.5}});
    const auto nu = DiscreteMeasure(std::vector<Atom>{{{0, 1, 0}, 0.5}, {{0, -1, 0}, 0.5}});
    const auto ring_lp = check_order_lp(ring, mu, nu);
    EXPECT_FALSE(ring_lp.in_order);
    expect_verified_witness(ring, ring_lp, mu, nu);
    EXPECT_EQ(check_order_lp(ball, mu, nu).in_order, check_order_potential(ball, mu, nu).in_order);
}

}  // namespace
}  // namespace skembed
