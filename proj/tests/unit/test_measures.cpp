#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "generators.hpp"
#include "skembed/error.hpp"
#include "skembed/measures.hpp"

namespace skembed {
namespace {

using testing::Rng;

DiscreteMeasure atoms(std::vector<Atom> a) { return DiscreteMeasure(std::move(a)); }

double profile_mass_at(const RadialProfile& p, double r) {
    double m = 0.0;
    for (std::size_t i = 0; i < p.radius.size(); ++i) {
        if (std::abs(p.radius[i] - r) < 1e-12) m += p.mass[i];
    }
    return m;
}

TEST(Measure, DropsZerosAndSortsAtoms) {
    const auto m = atoms({{{1, 0, 0}, 0.5}, {{0, 0, 0}, 0.0}, {{-1, 0, 0}, 0.5}});
    EXPECT_EQ(m.support_size(), 2u);
    EXPECT_LT(m.atoms()[0].z, m.atoms()[1].z);
    EXPECT_TRUE(m.is_probability());
    EXPECT_EQ(m.mass({5, 5, 5}), 0.0);
}

TEST(Measure, OffLatticeAtomIsRejected) {
    const Lattice lat = build_lattice(2, 1.0, 2.0);
    const auto m = DiscreteMeasure::dirac({9, 0, 0});
    EXPECT_FALSE(m.supported_on(lat));
    try {
        m.to_nodes(lat);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedAtom);
    }
}

TEST(ModulusPushforward, Examples) {
    const Lattice lat = build_lattice(2, 1.0, 3.0, 0.1);
    const auto p1 = modulus_pushforward(atoms({{{1, 0, 0}, 0.5}, {{0, 2, 0}, 0.5}}), lat);
    EXPECT_DOUBLE_EQ(profile_mass_at(p1, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(profile_mass_at(p1, 2.0), 0.5);
    EXPECT_DOUBLE_EQ(profile_mass_at(modulus_pushforward(DiscreteMeasure::dirac({0, 0, 0}), lat), 0.0), 1.0);
    const auto ring = atoms({{{1, 0, 0}, 0.25}, {{-1, 0, 0}, 0.25}, {{0, 1, 0}, 0.25}, {{0, -1, 0}, 0.25}});
    const auto p3 = modulus_pushforward(ring, lat);
    EXPECT_DOUBLE_EQ(profile_mass_at(p3, 1.0), 1.0);
    EXPECT_NEAR(p3.total(), 1.0, 1e-15);
}

TEST(REquivalence, Examples) {
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    EXPECT_TRUE(r_equivalent(DiscreteMeasure::dirac({1, 0, 0}), DiscreteMeasure::dirac({0, -1, 0}), lat, 0.0));
    EXPECT_FALSE(r_equivalent(DiscreteMeasure::dirac({1, 0, 0}), DiscreteMeasure::dirac({0, 2, 0}), lat, 0.0));
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        const auto phi = testing::random_measure(lat, rng, 5);
        EXPECT_TRUE(r_equivalent(phi, symmetrize(phi, lat), lat, 1e-12));
    }
}

TEST(Symmetrize, Examples) {
    const Lattice lat2 = build_lattice(2, 1.0, 3.0);
    const auto s = symmetrize(DiscreteMeasure::dirac({1, 0, 0}), lat2);
    ASSERT_EQ(s.support_size(), 4u);
    for (const auto& a : s.atoms()) EXPECT_NEAR(a.m, 0.25, 1e-15);

    const Lattice lat3 = build_lattice(3, 1.0, 2.0);
    const auto s3 = symmetrize(DiscreteMeasure::dirac({1, 1, 0}), lat3);
    // Oracle: enumerate the orbit of (1,1,0) directly.
    std::set<Point> orbit;
    for (const auto& m : point_group(3)) orbit.insert(m.apply({1, 1, 0}));
    ASSERT_EQ(orbit.size(), 12u);
    ASSERT_EQ(s3.support_size(), orbit.size());
    for (const auto& a : s3.atoms()) {
        EXPECT_TRUE(orbit.count(a.z));
        EXPECT_NEAR(a.m, 1.0 / 12.0, 1e-15);
    }
}

TEST(Symmetrize, InvariantMeasureIsFixed) {
    const Lattice lat = build_lattice(3, 1.0, 2.0);
    const auto s = symmetrize(DiscreteMeasure::dirac({2, 0, 0}), lat);
    EXPECT_TRUE(is_point_group_invariant(s, 3));
    const auto again = symmetrize(s, lat);
    ASSERT_EQ(again.support_size(), s.support_size());
    for (std::size_t i = 0; i < s.support_size(); ++i) EXPECT_NEAR(again.atoms()[i].m, s.atoms()[i].m, 1e-15);
}

TEST(Symmetrize, PropertiesOnRandomMeasures) {
    Rng rng(2);
    for (int d : {2, 3}) {
        const Lattice lat = build_lattice(d, 1.0, 3.0);
        for (int t = 0; t < 30; ++t) {
            const auto mu = testing::random_measure(lat, rng, 1 + rng.index(6));
            const auto s = symmetrize(mu, lat);
            const auto ss = symmetrize(s, lat);
            EXPECT_NEAR(s.total(), mu.total(), 1e-12);
            EXPECT_TRUE(is_point_group_invariant(s, d));
            EXPECT_LE(modulus_pushforward(s, lat).distance(modulus_pushforward(mu, lat)), 1e-12);
            for (const auto& a : s.atoms()) EXPECT_NEAR(ss.mass(a.z), a.m, 1e-12);
        }
    }
}

TEST(CommonMass, Examples) {
    const auto mu = atoms({{{0, 0, 0}, 0.5}, {{1, 0, 0}, 0.5}});
    const auto c1 = common_mass(mu, mu);
    EXPECT_EQ(c1.support_size(), 2u);
    EXPECT_DOUBLE_EQ(c1.total(), 1.0);
    EXPECT_TRUE(common_mass(DiscreteMeasure::dirac({0, 0, 0}), DiscreteMeasure::dirac({1, 0, 0})).empty());
    const auto nu = atoms({{{0, 0, 0}, 0.25}, {{2, 0, 0}, 0.75}});
    const auto c = common_mass(mu, nu);
    ASSERT_EQ(c.support_size(), 1u);
    EXPECT_EQ(c.atoms()[0].z, (Point{0, 0, 0}));
    EXPECT_DOUBLE_EQ(c.atoms()[0].m, 0.25);
}

TEST(CommonMass, BelowBothMarginals) {
    Rng rng(4);
    const Lattice lat = build_lattice(2, 1.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        const auto mu = testing::random_measure(lat, rng, 4);
        const auto nu = testing::random_measure(lat, rng, 4);
        const auto c = common_mass(mu, nu);
        for (const auto& a : c.atoms()) {
            EXPECT_LE(a.m, mu.mass(a.z));
            EXPECT_LE(a.m, nu.mass(a.z));
            EXPECT_EQ(a.m, std::min(mu.mass(a.z), nu.mass(a.z)));
        }
    }
}

TEST(PowerMoment, Examples) {
    const Point x{1, 1, 0};
    EXPECT_EQ(power_moment(DiscreteMeasure::dirac(x), x, 1.0, 1.0), 0.0);
    EXPECT_NEAR(power_moment(DiscreteMeasure::dirac({4, 5, 0}), x, 1.0, 1.0), 5.0, 1e-15);
    const auto ring = atoms({{{2, 1, 0}, 0.25}, {{0, 1, 0}, 0.25}, {{1, 2, 0}, 0.25}, {{1, 0, 0}, 0.25}});
    EXPECT_NEAR(power_moment(ring, x, 2.0, 1.0), 1.0, 1e-15);
    // Physical units: spacing scales distances.
    EXPECT_NEAR(power_moment(DiscreteMeasure::dirac({4, 5, 0}), x, 2.0, 0.5), 6.25, 1e-15);
}

TEST(Wasserstein1, Examples) {
    EXPECT_NEAR(wasserstein1(DiscreteMeasure::dirac({0, 0, 0}), DiscreteMeasure::dirac({3, 4, 0}), 1.0), 5.0, 1e-12);
    const auto mu = atoms({{{0, 0, 0}, 0.5}, {{2, 0, 0}, 0.5}});
    EXPECT_NEAR(wasserstein1(mu, mu, 1.0), 0.0, 1e-12);
    EXPECT_NEAR(wasserstein1(mu, DiscreteMeasure::dirac({1, 0, 0}), 1.0), 1.0, 1e-12);
    try {
        wasserstein1(mu, DiscreteMeasure::dirac({1, 0, 0}, 0.5), 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MassMismatch);
    }
}

// On a line, W1 equals the L1 distance between CDFs; use that as an independent oracle.
TEST(Wasserstein1, MatchesCdfFormulaOnALine) {
    Rng rng(8);
    for (int t = 0; t < 25; ++t) {
        std::vector<Atom> a, b;
        std::vector<double> pa(11, 0.0), pb(11, 0.0);
        double ta = 0.0, tb = 0.0;
        for (int i = 0; i <= 10; ++i) {
            pa[i] = rng.coin(0.4) ? rng.uniform(0.1, 1) : 0.0;
            pb[i] = rng.coin(0.4) ? rng.uniform(0.1, 1) : 0.0;
            ta += pa[i];
            tb += pb[i];
        }
        if (ta == 0.0 || tb == 0.0) continue;
        for (int i = 0; i <= 10; ++i) {
            pa[i] /= ta;
            pb[i] /= tb;
            if (pa[i] > 0) a.push_back({{i - 5, 0, 0}, pa[i]});
            if (pb[i] > 0) b.push_back({{i - 5, 0, 0}, pb[i]});
        }
        double cdf = 0.0, oracle = 0.0;
        for (int i = 0; i < 10; ++i) {
            cdf += pa[i] - pb[i];
            oracle += std::abs(cdf) * 0.5;
        }
        EXPECT_NEAR(wasserstein1(DiscreteMeasure(a), DiscreteMeasure(b), 0.5), oracle, 1e-9);
    }
}

TEST(Wasserstein1, TriangleInequality) {
    Rng rng(9);
    const Lattice lat = build_lattice(2, 1.0, 3.0);
    for (int t = 0; t < 30; ++t) {
        const auto a = testing::random_measure(lat, rng, 3);
        const auto b = testing::random_measure(lat, rng, 3);
        const auto c = testing::random_measure(lat, rng, 3);
        EXPECT_LE(wasserstein1(a, c, 1.0), wasserstein1(a, b, 1.0) + wasserstein1(b, c, 1.0) + 1e-9);
    }
}

}  // namespace
}  // namespace skembed
