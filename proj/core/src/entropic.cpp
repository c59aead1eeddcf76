// Entropic LP solver: cyclic exact dual coordinate ascent on
//   max_y  b^T y - eps * sum_j exp((A_j^T y - c_j) / eps),
// carried out in the log domain. psi_j = A_j^T y - c_j is maintained per column,
// so x_j = exp(psi_j / eps) never needs to be formed during the sweeps.

#include <algorithm>
#include <cmath>
#include <limits>

#include "skembed/error.hpp"
#include "skembed/lp.hpp"

namespace skembed {
namespace {

struct RowEntry {
    std::size_t col;
    double a;
};

double log_sum_exp(const std::vector<double>& v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    const double mx = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double t : v) s += std::exp(t - mx);
    return mx + std::log(s);
}

class RowSolver {
public:
    RowSolver(const std::vector<RowEntry>& row, const std::vector<double>& psi, double b, double eps)
        : row_(row), psi_(psi), b_(b), eps_(eps) {}

    // H(t) = log(sum_{a>0} a e^{(psi+a t)/eps} [+ |b| if b<0]) - log(sum_{a<0} |a| e^{(psi+a t)/eps} [+ b if b>0])
    // is strictly increasing; its root is the exact coordinate maximizer.
    double value(double t) const {
        pos_.clear();
        neg_.clear();
        for (const auto& e : row_) {
            const double l = (psi_[e.col] + e.a * t) / eps_;
            if (e.a > 0.0) pos_.push_back(std::log(e.a) + l);
            else neg_.push_back(std::log(-e.a) + l);
        }
        if (b_ < 0.0) pos_.push_back(std::log(-b_));
        if (b_ > 0.0) neg_.push_back(std::log(b_));
        return log_sum_exp(pos_) - log_sum_exp(neg_);
    }

    double solve() const {
        // Bracket the root, then safeguarded secant-bisection.
        double step = eps_;
        double lo = 0.0, hi = 0.0;
        double hlo = value(0.0), hhi = hlo;
        if (!std::isfinite(hlo)) return 0.0;
        if (hlo == 0.0) return 0.0;
        if (hlo < 0.0) {
            for (int k = 0; k < 200 && hhi < 0.0; ++k) {
                lo = hi;
                hlo = hhi;
                hi += step;
                step *= 2.0;
                hhi = value(hi);
            }
        } else {
            for (int k = 0; k < 200 && hlo > 0.0; ++k) {
                hi = lo;
                hhi = hlo;
                lo -= step;
                step *= 2.0;
                hlo = value(lo);
            }
        }
        if (!(hlo <= 0.0 && hhi >= 0.0)) return hlo > 0.0 ? lo : hi;
        for (int k = 0; k < 100; ++k) {
            double t = lo - hlo * (hi - lo) / (hhi - hlo);
            if (!(t > lo && t < hi) || k % 3 == 2) t = 0.5 * (lo + hi);
            const double ht = value(t);
            if (ht == 0.0) return t;
            if (ht < 0.0) {
                lo = t;
                hlo = ht;
            } else {
                hi = t;
                hhi = ht;
            }
            if (hi - lo <= 1e-14 * (1.0 + std::abs(lo)) || std::min(-hlo, hhi) < 1e-15) break;
        }
        return -hlo < hhi ? lo : hi;
    }

private:
    const std::vector<RowEntry>& row_;
    const std::vector<double>& psi_;
    double b_;
    double eps_;
    mutable std::vector<double> pos_;
    mutable std::vector<double> neg_;
};

}  // namespace

LpSolution solve_entropic(const LinearProgram& prog, const EntropicOptions& options) {
    prog.validate();
    if (!prog.embedding_shaped()) {
        throw Error(ErrorCode::NotEmbeddingShaped, "entropic solver needs a program from build_problem");
    }
    for (RowSense s : prog.row_senses()) {
        if (s != RowSense::Equal) throw Error(ErrorCode::NotEmbeddingShaped, "inequality row");
    }
    for (double l : prog.lower_bounds()) {
        if (l != 0.0) throw Error(ErrorCode::NotEmbeddingShaped, "nonzero lower bound");
    }
    if (!(options.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");

    const std::size_t n = prog.num_variables();
    const std::size_t m = prog.num_rows();
    const double sense = prog.sense() == ObjectiveSense::Minimize ? 1.0 : -1.0;
    std::vector<double> cost(n);
    for (std::size_t j = 0; j < n; ++j) cost[j] = sense * prog.costs()[j];

    std::vector<std::vector<RowEntry>> rows(m);
    for (const auto& t : prog.triplets()) rows[t.row].push_back({t.col, t.value});

    // Presolve: a row with b = 0 and one-signed coefficients forces its columns to 0.
    std::vector<bool> dead(n, false);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < m; ++i) {
            if (prog.rhs()[i] != 0.0) continue;
            bool has_pos = false, has_neg = false;
            for (const auto& e : rows[i]) {
                if (dead[e.col]) continue;
                has_pos |= e.a > 0.0;
                has_neg |= e.a < 0.0;
            }
            if (has_pos == has_neg) continue;
            for (const auto& e : rows[i]) {
                if (!dead[e.col]) {
                    dead[e.col] = true;
                    changed = true;
                }
            }
        }
    }
    for (auto& row : rows) {
        std::erase_if(row, [&](const RowEntry& e) { return dead[e.col]; });
    }

    double cmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!dead[j]) cmax = std::max(cmax, std::abs(cost[j]));
    }

    std::vector<double> y(m, 0.0);
    std::vector<double> psi(n);
    for (std::size_t j = 0; j < n; ++j) psi[j] = -cost[j];

    auto residual = [&](double eps) {
        std::vector<double> ax(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (const auto& e : rows[i]) ax[i] += e.a * std::exp(psi[e.col] / eps);
        }
        double r = 0.0;
        for (std::size_t i = 0; i < m; ++i) r = std::max(r, std::abs(ax[i] - prog.rhs()[i]));
        return r;
    };

    std::vector<double> schedule;
    if (options.epsilon_scaling) {
        for (double e = std::max(options.epsilon, cmax); e > options.epsilon * 1.0000001; e /= 4.0) {
            schedule.push_back(e);
        }
    }
    schedule.push_back(options.epsilon);

    LpSolution sol;
    sol.status = LpStatus::MaxIterReached;
    std::size_t sweeps = 0;
    double res = std::numeric_limits<double>::infinity();
    double eps = schedule.front();
    for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
        eps = schedule[stage];
        const bool last = stage + 1 == schedule.size();
        const double stage_tol = last ? options.tol : std::max(options.tol, 1e-3 * eps);
        while (sweeps < options.max_iter) {
            for (std::size_t i = 0; i < m; ++i) {
                if (rows[i].empty()) continue;
                const double t = RowSolver(rows[i], psi, prog.rhs()[i], eps).solve();
                if (t == 0.0) continue;
                y[i] += t;
                for (const auto& e : rows[i]) psi[e.col] += e.a * t;
            }
            ++sweeps;
            res = residual(eps);
            if (res <= stage_tol) break;
        }
        if (last && res <= options.tol) sol.status = LpStatus::Optimal;
        if (sweeps >= options.max_iter) break;
    }

    sol.iterations = sweeps;
    sol.primal.assign(n, 0.0);
    double entropy_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (dead[j]) continue;
        sol.primal[j] = std::exp(psi[j] / eps);
        entropy_mass += sol.primal[j];
    }
    for (std::size_t j = 0; j < n; ++j) sol.objective += prog.costs()[j] * sol.primal[j];
    sol.duals.resize(m);
    double by = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sol.duals[i] = sense * y[i];
        by += prog.rhs()[i] * y[i];
    }
    sol.dual_objective = sense * (by - eps * entropy_mass);
    sol.primal_residual = res;
    return sol;
}

}  // namespace skembed
