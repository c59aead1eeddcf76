#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "skembed/error.hpp"
#include "skembed/lp.hpp"

namespace skembed {
namespace {

// Brute-force vertex enumeration over the standard form (slacks appended).
// Returns the optimal value of min c^T x, or nullopt when no vertex is feasible.
std::optional<double> vertex_oracle(const Eigen::MatrixXd& a_in, const Eigen::VectorXd& b_in,
                                    const Eigen::VectorXd& c) {
    // Drop redundant rows; an inconsistent row system is infeasible outright.
    Eigen::MatrixXd ab(a_in.rows(), a_in.cols() + 1);
    ab << a_in, b_in;
    std::vector<int> keep;
    for (int i = 0; i < a_in.rows(); ++i) {
        Eigen::MatrixXd trial(static_cast<int>(keep.size()) + 1, ab.cols());
        for (std::size_t k = 0; k < keep.size(); ++k) trial.row(static_cast<int>(k)) = ab.row(keep[k]);
        trial.row(static_cast<int>(keep.size())) = ab.row(i);
        if (Eigen::FullPivLU<Eigen::MatrixXd>(trial).rank() == static_cast<int>(keep.size()) + 1) keep.push_back(i);
    }
    Eigen::MatrixXd a(keep.size(), a_in.cols());
    Eigen::VectorXd b(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        a.row(static_cast<int>(k)) = a_in.row(keep[k]);
        b[static_cast<int>(k)] = b_in[keep[k]];
    }
    if (Eigen::FullPivLU<Eigen::MatrixXd>(a).rank() < a.rows()) return std::nullopt;
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    std::optional<double> best;
    std::vector<int> pick(m);
    std::function<void(int, int)> rec = [&](int k, int from) {
        if (k == m) {
            Eigen::MatrixXd bm(m, m);
            for (int i = 0; i < m; ++i) bm.col(i) = a.col(pick[i]);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(bm);
            if (lu.rank() < m) return;
            Eigen::VectorXd xb = lu.solve(b);
            double obj = 0.0;
            for (int i = 0; i < m; ++i) {
                if (xb[i] < -1e-9) return;
                obj += c[pick[i]] * xb[i];
            }
            if (!best || obj < *best) best = obj;
            return;
        }
        for (int j = from; j < n; ++j) {
            pick[k] = j;
            rec(k + 1, j + 1);
        }
    };
    rec(0, 0);
    return best;
}

TEST(SolveExact, LowerBoundRow) {
    LinearProgram lp;
    const auto x = lp.add_variable(1.0);
    const auto r = lp.add_row(RowSense::GreaterEqual, 3.0);
    lp.add_coefficient(r, x, 1.0);
    const auto sol = solve_exact(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.primal[0], 3.0, 1e-12);
    EXPECT_NEAR(sol.objective, 3.0, 1e-12);
    EXPECT_NEAR(sol.duals[0], 1.0, 1e-12);
}

TEST(SolveExact, InfeasibleWithCertificate) {
    LinearProgram lp;
    const auto x = lp.add_variable(0.0);
    const auto r = lp.add_row(RowSense::LessEqual, -1.0);
    lp.add_coefficient(r, x, 1.0);
    const auto sol = solve_exact(lp);
    ASSERT_EQ(sol.status, LpStatus::Infeasible);
    const auto rep = check_farkas(lp, sol.farkas);
    EXPECT_TRUE(rep.valid);
    EXPECT_GT(rep.certificate_value, 0.0);
}

TEST(SolveExact, TransportOnTheLine) {
    // W1(1/2 d_0 + 1/2 d_2, d_1): both atoms move distance 1.
    LinearProgram lp;
    const double pos[2] = {0.0, 2.0};
    const double mass[2] = {0.5, 0.5};
    const auto row_b = lp.add_row(RowSense::Equal, 1.0);
    for (int i = 0; i < 2; ++i) {
        const auto row = lp.add_row(RowSense::Equal, mass[i]);
        const auto v = lp.add_variable(std::abs(pos[i] - 1.0));
        lp.add_coefficient(row, v, 1.0);
        lp.add_coefficient(row_b, v, 1.0);
    }
    const auto sol = solve_exact(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.objective, 1.0, 1e-12);
}

TEST(SolveExact, FreeVariableAndMaximize) {
    // max x + y s.t. x - y = 1, x + 2y <= 4, y free -> x = 2, y = 1.
    LinearProgram lp;
    lp.set_sense(ObjectiveSense::Maximize);
    const auto x = lp.add_variable(1.0);
    const auto y = lp.add_variable(1.0, LinearProgram::kFree);
    const auto r0 = lp.add_row(RowSense::Equal, 1.0);
    const auto r1 = lp.add_row(RowSense::LessEqual, 4.0);
    lp.add_coefficient(r0, x, 1.0);
    lp.add_coefficient(r0, y, -1.0);
    lp.add_coefficient(r1, x, 1.0);
    lp.add_coefficient(r1, y, 2.0);
    const auto sol = solve_exact(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.primal[x], 2.0, 1e-12);
    EXPECT_NEAR(sol.primal[y], 1.0, 1e-12);
    const auto rep = check_optimality(lp, sol);
    EXPECT_LE(rep.dual_residual, 1e-9);
    EXPECT_LE(rep.gap, 1e-8);
}

TEST(SolveExact, ShiftedLowerBound) {
    LinearProgram lp;
    const auto x = lp.add_variable(2.0, 1.5);
    const auto r = lp.add_row(RowSense::LessEqual, 10.0);
    lp.add_coefficient(r, x, 1.0);
    const auto sol = solve_exact(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.primal[x], 1.5, 1e-12);
    EXPECT_NEAR(sol.objective, 3.0, 1e-12);
}

TEST(SolveExact, Unbounded) {
    LinearProgram lp;
    const auto x = lp.add_variable(-1.0);
    const auto r = lp.add_row(RowSense::GreaterEqual, 1.0);
    lp.add_coefficient(r, x, 1.0);
    EXPECT_EQ(solve_exact(lp).status, LpStatus::Unbounded);
}

TEST(SolveExact, SizeCap) {
    LinearProgram lp;
    const auto r = lp.add_row(RowSense::Equal, 1.0);
    for (int j = 0; j < 11; ++j) lp.add_coefficient(r, lp.add_variable(1.0), 1.0);
    ExactOptions opt;
    opt.max_nonzeros = 10;
    try {
        solve_exact(lp, opt);
        FAIL() << "expected SizeCapExceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SizeCapExceeded);
    }
}

TEST(SolveExact, AlternativeOptimaFlag) {
    // min x + y s.t. x + y = 1: the whole segment is optimal.
    LinearProgram lp;
    const auto x = lp.add_variable(1.0);
    const auto y = lp.add_variable(1.0);
    const auto r = lp.add_row(RowSense::Equal, 1.0);
    lp.add_coefficient(r, x, 1.0);
    lp.add_coefficient(r, y, 1.0);
    EXPECT_TRUE(solve_exact(lp).alternative_optima);

    LinearProgram unique;
    const auto u = unique.add_variable(1.0);
    const auto v = unique.add_variable(2.0);
    const auto s = unique.add_row(RowSense::Equal, 1.0);
    unique.add_coefficient(s, u, 1.0);
    unique.add_coefficient(s, v, 1.0);
    EXPECT_FALSE(solve_exact(unique).alternative_optima);
}

TEST(SolveExact, InvalidProgram) {
    LinearProgram lp;
    lp.add_variable(1.0);
    lp.add_row(RowSense::Equal, 1.0);
    lp.add_coefficient(0, 3, 1.0);
    EXPECT_THROW(solve_exact(lp), Error);
}

TEST(TripletText, Header) {
    LinearProgram lp;
    const auto x = lp.add_variable(1.0);
    const auto r = lp.add_row(RowSense::GreaterEqual, 3.0);
    lp.add_coefficient(r, x, 2.0);
    const std::string text = lp.to_triplet_text();
    EXPECT_EQ(text.rfind("skembed-lp 1 1 1 min\n", 0), 0u);
    EXPECT_NE(text.find("a 0 0 2\n"), std::string::npos);
    EXPECT_NE(text.find("r 0 G 3\n"), std::string::npos);
}

// Random bounded programs: min c^T x, A x (<=|=|>=) b, sum x <= 10, x >= 0, compared
// with vertex enumeration; infeasible cases must come with a valid certificate.
TEST(SolveExactProperty, MatchesVertexEnumeration) {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> coef(-3, 3), rhs(-4, 6), nvar(2, 5), nrow(1, 3), sense(0, 2);
    int infeasible = 0, optimal = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = nvar(rng);
        const int m = nrow(rng);
        LinearProgram lp;
        for (int j = 0; j < n; ++j) lp.add_variable(coef(rng));
        // Standard-form matrix for the oracle: structural, then one slack per inequality.
        std::vector<std::vector<double>> rows;
        std::vector<double> bs;
        std::vector<int> senses;
        for (int i = 0; i < m + 1; ++i) {
            const bool cap = i == m;
            const int s = cap ? 0 : sense(rng);
            const double b = cap ? 10.0 : rhs(rng);
            const auto r = lp.add_row(s == 0 ? RowSense::LessEqual : s == 1 ? RowSense::Equal : RowSense::GreaterEqual, b);
            std::vector<double> row(n);
            for (int j = 0; j < n; ++j) {
                row[j] = cap ? 1.0 : coef(rng);
                lp.add_coefficient(r, j, row[j]);
            }
            rows.push_back(row);
            bs.push_back(b);
            senses.push_back(s);
        }
        int slacks = 0;
        for (int s : senses) slacks += s != 1;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, n + slacks);
        Eigen::VectorXd b(m + 1), c = Eigen::VectorXd::Zero(n + slacks);
        int k = n;
        for (int i = 0; i <= m; ++i) {
            for (int j = 0; j < n; ++j) a(i, j) = rows[i][j];
            if (senses[i] == 0) a(i, k++) = 1.0;
            if (senses[i] == 2) a(i, k++) = -1.0;
            b[i] = bs[i];
        }
        for (int j = 0; j < n; ++j) c[j] = lp.costs()[j];

        const auto expected = vertex_oracle(a, b, c);
        const auto sol = solve_exact(lp);
        if (!expected) {
            ++infeasible;
            ASSERT_EQ(sol.status, LpStatus::Infeasible) << "trial " << trial;
            EXPECT_TRUE(check_farkas(lp, sol.farkas).valid) << "trial " << trial;
        } else {
            ++optimal;
            ASSERT_EQ(sol.status, LpStatus::Optimal) << "trial " << trial;
            EXPECT_NEAR(sol.objective, *expected, 1e-9) << "trial " << trial;
            const auto rep = check_optimality(lp, sol);
            EXPECT_LE(rep.primal_residual, 1e-9);
            EXPECT_LE(rep.dual_residual, 1e-9);
            EXPECT_LE(rep.gap, 1e-8);
            EXPECT_LE(rep.complementarity, 1e-8);
        }
    }
    EXPECT_GT(infeasible, 10);
    EXPECT_GT(optimal, 10);
}

// Scaling the objective by k > 0 scales the optimum by k and keeps the optimal support.
TEST(SolveExactProperty, ObjectiveScaling) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        // Random transport problem with generic costs (unique optimum a.s.).
        const int p = 3, q = 4;
        std::vector<double> cost(p * q), a(p), b(q);
        double ta = 0.0, tb = 0.0;
        for (auto& v : cost) v = u(rng);
        for (auto& v : a) ta += (v = 0.1 + u(rng));
        for (auto& v : b) tb += (v = 0.1 + u(rng));
        auto build = [&](double k) {
            LinearProgram lp;
            for (int i = 0; i < p; ++i) lp.add_row(RowSense::Equal, a[i] / ta);
            for (int j = 0; j < q; ++j) lp.add_row(RowSense::Equal, b[j] / tb);
            for (int i = 0; i < p; ++i) {
                for (int j = 0; j < q; ++j) {
                    const auto v = lp.add_variable(k * cost[i * q + j]);
                    lp.add_coefficient(i, v, 1.0);
                    lp.add_coefficient(p + j, v, 1.0);
                }
            }
            return lp;
        };
        const auto s1 = solve_exact(build(1.0));
        const auto s3 = solve_exact(build(3.5));
        ASSERT_EQ(s1.status, LpStatus::Optimal);
        ASSERT_EQ(s3.status, LpStatus::Optimal);
        EXPECT_NEAR(s3.objective, 3.5 * s1.objective, 1e-9);
        for (std::size_t j = 0; j < s1.primal.size(); ++j) {
            EXPECT_EQ(s1.primal[j] > 1e-12, s3.primal[j] > 1e-12);
        }
    }
}

TEST(CheckFarkas, RejectsBogusCertificate) {
    LinearProgram lp;
    const auto x = lp.add_variable(0.0);
    const auto r = lp.add_row(RowSense::LessEqual, 1.0);
    lp.add_coefficient(r, x, 1.0);
    const std::vector<double> y{-1.0};
    EXPECT_FALSE(check_farkas(lp, y).valid);
}

TEST(SolveEntropic, RequiresEmbeddingShape) {
    LinearProgram lp;
    const auto x = lp.add_variable(1.0);
    const auto r = lp.add_row(RowSense::Equal, 1.0);
    lp.add_coefficient(r, x, 1.0);
    try {
        solve_entropic(lp);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotEmbeddingShaped);
    }
}

TEST(SolveEntropic, TransportConvergesToExact) {
    // Small transport in embedding shape: equality rows, zero lower bounds.
    const std::vector<double> a{0.3, 0.7}, b{0.5, 0.25, 0.25};
    const std::vector<double> cost{0.0, 0.05, 0.1, 0.08, 0.02, 0.01};
    LinearProgram lp;
    for (double v : a) lp.add_row(RowSense::Equal, v);
    for (double v : b) lp.add_row(RowSense::Equal, v);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            const auto v = lp.add_variable(cost[i * 3 + j]);
            lp.add_coefficient(i, v, 1.0);
            lp.add_coefficient(2 + j, v, 1.0);
        }
    }
    lp.mark_embedding_shaped();
    const double exact = solve_exact(lp).objective;
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        EntropicOptions opt;
        opt.epsilon = eps;
        const auto sol = solve_entropic(lp, opt);
        ASSERT_EQ(sol.status, LpStatus::Optimal) << eps;
        EXPECT_LE(sol.primal_residual, opt.tol);
        const double err = std::abs(sol.objective - exact);
        EXPECT_LE(err, prev + 1e-9) << eps;
        prev = err;
    }
    EXPECT_LT(prev, 1e-4);
}

}  // namespace
}  // namespace skembed
