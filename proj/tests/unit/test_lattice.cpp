#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "generators.hpp"
#include "skembed/error.hpp"
#include "skembed/lattice.hpp"

namespace skembed {
namespace {

// Brute-force count of integer points with |z| h <= R.
std::size_t count_points(int d, double h, double r) {
    const int b = static_cast<int>(r / h) + 1;
    std::size_t n = 0;
    for (int i = -b; i <= b; ++i)
        for (int j = -b; j <= b; ++j)
            for (int k = (d == 3 ? -b : 0); k <= (d == 3 ? b : 0); ++k)
                if (std::sqrt(double(i * i + j * j + k * k)) * h <= r + 1e-12) ++n;
    return n;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return ErrorCode::InvalidArgument;
}

TEST(Lattice, SmallDiskHasNineNodes) {
    const Lattice lat = build_lattice(2, 1.0, 1.5);
    EXPECT_EQ(lat.size(), 9u);
    const auto o = lat.index_of({0, 0, 0});
    ASSERT_TRUE(o.has_value());
    EXPECT_TRUE(lat.is_interior(*o));
    EXPECT_EQ(lat.interior_count(), 1u);
}

TEST(Lattice, TooSmallIsDegenerate) {
    EXPECT_EQ(code_of([] { build_lattice(2, 1.0, 0.5); }), ErrorCode::DegenerateDomain);
}

TEST(Lattice, BallNodeCountMatchesEnumeration) {
    EXPECT_EQ(build_lattice(3, 1.0, 2.2).size(), 33u);
    for (double r : {2.2, 3.0, 4.5}) EXPECT_EQ(build_lattice(3, 1.0, r).size(), count_points(3, 1.0, r));
    for (double r : {3.0, 4.0}) EXPECT_EQ(build_lattice(2, 0.5, r).size(), count_points(2, 0.5, r));
}

TEST(Lattice, RejectsBadDimension) {
    EXPECT_EQ(code_of([] { build_lattice(4, 1.0, 3.0); }), ErrorCode::InvalidDimension);
    EXPECT_EQ(code_of([] { point_group(1); }), ErrorCode::InvalidDimension);
}

TEST(Lattice, InteriorNodesHaveAllNeighbors) {
    for (int d : {2, 3}) {
        const Lattice lat = build_lattice(d, 1.0, 3.5);
        for (std::size_t z = 0; z < lat.size(); ++z) {
            if (lat.is_interior(z)) {
                EXPECT_EQ(lat.neighbors(z).size(), static_cast<std::size_t>(2 * d));
            } else {
                EXPECT_LT(lat.neighbors(z).size(), static_cast<std::size_t>(2 * d));
            }
        }
    }
}

TEST(Lattice, NodeSetAndShellsAreGroupInvariant) {
    for (int d : {2, 3}) {
        const Lattice lat = build_lattice(d, 0.5, 2.5);
        for (const auto& m : point_group(d)) {
            for (std::size_t z = 0; z < lat.size(); ++z) {
                const auto img = lat.index_of(m.apply(lat.node(z)));
                ASSERT_TRUE(img.has_value());
                EXPECT_EQ(lat.shell_of(*img), lat.shell_of(z));
                EXPECT_EQ(lat.is_interior(*img), lat.is_interior(z));
            }
        }
    }
}

TEST(Lattice, ShellsPartitionNodes) {
    const Lattice lat = build_lattice(3, 1.0, 3.0);
    std::vector<int> seen(lat.size(), 0);
    for (std::size_t s = 0; s < lat.shells().size(); ++s) {
        for (std::size_t z : lat.shells()[s].members) {
            ++seen[z];
            EXPECT_EQ(lat.shell_of(z), s);
            EXPECT_LE(std::abs(lat.norm(z) - lat.shells()[s].radius), lat.shell_tol() + 1e-12);
        }
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST(Lattice, RebuildIsDeterministic) {
    const Lattice a = build_lattice(3, 0.5, 2.0);
    const Lattice b = build_lattice(3, 0.5, 2.0);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t z = 0; z < a.size(); ++z) {
        EXPECT_EQ(a.node(z), b.node(z));
        EXPECT_EQ(a.is_interior(z), b.is_interior(z));
    }
    EXPECT_TRUE(std::is_sorted(a.nodes().begin(), a.nodes().end()));
}

TEST(Lattice, AnnulusDropsTheHole) {
    const Lattice lat = Lattice::build({2, 0.5, 4.0, -1.0, 1.0});
    EXPECT_FALSE(lat.contains({0, 0, 0}));
    EXPECT_TRUE(lat.contains({2, 0, 0}));
    // Nodes next to the hole are boundary nodes.
    EXPECT_FALSE(lat.is_interior(*lat.index_of({2, 0, 0})));
    EXPECT_TRUE(lat.is_interior(*lat.index_of({4, 0, 0})));
}

TEST(PointGroup, OrderAndClosure) {
    for (int d : {2, 3}) {
        const auto g = point_group(d);
        EXPECT_EQ(g.size(), d == 2 ? 8u : 48u);
        for (const auto& a : g) {
            EXPECT_NE(std::find(g.begin(), g.end(), a.inverse()), g.end());
            for (const auto& b : g) EXPECT_NE(std::find(g.begin(), g.end(), a.compose(b)), g.end());
        }
    }
}

TEST(PointGroup, ComposeActsAsFunctionComposition) {
    testing::Rng rng(3);
    const auto g = point_group(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto& a = g[rng.index(g.size())];
        const auto& b = g[rng.index(g.size())];
        const Point z{rng.integer(-5, 5), rng.integer(-5, 5), rng.integer(-5, 5)};
        EXPECT_EQ(a.compose(b).apply(z), a.apply(b.apply(z)));
        EXPECT_EQ(a.inverse().apply(a.apply(z)), z);
    }
}

TEST(CosAngle, Examples) {
    EXPECT_NEAR(cos_angle({1, 0, 0}, {0, 3, 0}), 0.0, 1e-15);
    EXPECT_NEAR(cos_angle({1, 0, 0}, {-2, 0, 0}), -1.0, 1e-15);
    EXPECT_NEAR(cos_angle({1, 0, 0}, {1, 1, 0}), std::sqrt(0.5), 1e-15);
    EXPECT_EQ(code_of([] { cos_angle({0, 0, 0}, {1, 0, 0}); }), ErrorCode::ZeroVector);
}

TEST(WalkKernel, RowsAndSymmetry) {
    const Lattice lat = build_lattice(3, 1.0, 3.0);
    const WalkKernel p(lat);
    for (std::size_t z = 0; z < lat.size(); ++z) {
        double row = 0.0;
        for (std::size_t w = 0; w < lat.size(); ++w) row += p.transition(z, w);
        EXPECT_NEAR(row, lat.is_interior(z) ? 1.0 : 0.0, 1e-15);
    }
    testing::Rng rng(11);
    const auto g = point_group(3);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t w = rng.index(lat.size());
        const auto nb = lat.neighbors(w);
        const std::size_t z = rng.coin() ? nb[rng.index(nb.size())] : rng.index(lat.size());
        const auto& m = g[rng.index(g.size())];
        EXPECT_EQ(p.transition(w, z), p.transition(lat.image(m, w), lat.image(m, z)));
    }
}

TEST(WalkKernel, ApplyAndTransposeAreAdjoint) {
    const Lattice lat = build_lattice(2, 0.5, 2.0);
    const WalkKernel p(lat);
    testing::Rng rng(5);
    std::vector<double> f(lat.size()), m(lat.size());
    for (auto& v : f) v = rng.uniform(-1, 1);
    for (auto& v : m) v = rng.uniform(-1, 1);
    const auto pf = p.apply(f);
    const auto ptm = p.apply_transpose(m);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t z = 0; z < lat.size(); ++z) {
        lhs += m[z] * pf[z];
        rhs += ptm[z] * f[z];
    }
    EXPECT_NEAR(lhs, rhs, 1e-12);
}

}  // namespace
}  // namespace skembed
