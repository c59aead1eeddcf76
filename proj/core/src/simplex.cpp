// Two-phase revised simplex on the standard form  A x = b, x >= 0, b >= 0.
//
// The user program is brought to standard form by shifting finite lower bounds,
// splitting free variables, adding one slack per inequality row and flipping rows
// with negative right-hand side. Rows without a +1 slack get an artificial.
// The basis inverse is a sparse LU of B_0 followed by a product of eta matrices.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "skembed/error.hpp"
#include "skembed/lp.hpp"

namespace skembed {
namespace {

constexpr double kPivotTol = 1e-7;
// Pivots below this are recomputed from a fresh factorization before use.
constexpr double kRecheckPivot = 1e-5;
constexpr double kBreakdownPivot = 1e-13;
constexpr double kDriveOutTol = 1e-7;
constexpr std::size_t kStallLimit = 50;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

enum class ColumnKind { Structural, Slack, Artificial };

struct StandardForm {
    std::size_t rows = 0;
    std::vector<std::size_t> start{0};  // CSC column pointers
    std::vector<std::size_t> index;
    std::vector<double> value;
    std::vector<double> cost;  // phase-2 cost, already in minimization convention
    std::vector<ColumnKind> kind;
    std::vector<double> b;
    std::vector<double> flip;  // +1 or -1 per row

    // Mapping of user variable j to its columns.
    std::vector<std::size_t> pos_col;
    std::vector<std::size_t> neg_col;  // kNone unless free
    std::vector<std::size_t> twin;     // split partner column, kNone otherwise
    std::vector<std::size_t> initial_basis;

    std::size_t cols() const { return cost.size(); }

    void push_column(const std::vector<std::pair<std::size_t, double>>& entries, double c,
                     ColumnKind k) {
        for (const auto& [i, v] : entries) {
            index.push_back(i);
            value.push_back(v);
        }
        start.push_back(index.size());
        cost.push_back(c);
        kind.push_back(k);
        twin.push_back(kNone);
    }
};

StandardForm to_standard_form(const LinearProgram& prog) {
    StandardForm sf;
    const std::size_t m = prog.num_rows();
    const std::size_t n = prog.num_variables();
    const double s = prog.sense() == ObjectiveSense::Minimize ? 1.0 : -1.0;
    sf.rows = m;

    // Column-wise grouping of the user triplets (duplicates are summed).
    std::vector<std::vector<std::pair<std::size_t, double>>> columns(n);
    for (const auto& t : prog.triplets()) columns[t.col].push_back({t.row, t.value});
    for (auto& col : columns) {
        std::sort(col.begin(), col.end());
        std::size_t w = 0;
        for (std::size_t r = 0; r < col.size(); ++r) {
            if (w > 0 && col[w - 1].first == col[r].first) {
                col[w - 1].second += col[r].second;
            } else {
                col[w++] = col[r];
            }
        }
        col.resize(w);
    }

    std::vector<double> rhs = prog.rhs();
    for (std::size_t j = 0; j < n; ++j) {
        const double l = prog.lower_bounds()[j];
        if (std::isfinite(l) && l != 0.0) {
            for (const auto& [i, v] : columns[j]) rhs[i] -= v * l;
        }
    }
    sf.flip.assign(m, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (rhs[i] < 0.0) sf.flip[i] = -1.0;
    }
    sf.b.resize(m);
    for (std::size_t i = 0; i < m; ++i) sf.b[i] = sf.flip[i] * rhs[i];

    sf.pos_col.assign(n, kNone);
    sf.neg_col.assign(n, kNone);
    for (std::size_t j = 0; j < n; ++j) {
        auto entries = columns[j];
        for (auto& e : entries) e.second *= sf.flip[e.first];
        const double c = s * prog.costs()[j];
        sf.pos_col[j] = sf.cols();
        sf.push_column(entries, c, ColumnKind::Structural);
        if (!std::isfinite(prog.lower_bounds()[j])) {
            for (auto& e : entries) e.second = -e.second;
            sf.neg_col[j] = sf.cols();
            sf.push_column(entries, -c, ColumnKind::Structural);
            sf.twin[sf.pos_col[j]] = sf.neg_col[j];
            sf.twin[sf.neg_col[j]] = sf.pos_col[j];
        }
    }

    sf.initial_basis.assign(m, kNone);
    for (std::size_t i = 0; i < m; ++i) {
        const RowSense sense = prog.row_senses()[i];
        if (sense == RowSense::Equal) continue;
        const double coef = (sense == RowSense::LessEqual ? 1.0 : -1.0) * sf.flip[i];
        const std::size_t col = sf.cols();
        sf.push_column({{i, coef}}, 0.0, ColumnKind::Slack);
        if (coef > 0.0) sf.initial_basis[i] = col;
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (sf.initial_basis[i] != kNone) continue;
        sf.initial_basis[i] = sf.cols();
        sf.push_column({{i, 1.0}}, 0.0, ColumnKind::Artificial);
    }
    return sf;
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Eta {
    std::size_t r = 0;
    double pivot = 1.0;
    std::vector<std::pair<std::size_t, double>> entries;  // off-pivot alpha_i
};

class Simplex {
public:
    Simplex(const StandardForm& sf, const ExactOptions& options)
        : sf_(sf), opt_(options), m_(sf.rows), n_(sf.cols()) {
        basis_ = sf.initial_basis;
        position_.assign(n_, kNone);
        pinned_.assign(n_, false);
        for (std::size_t i = 0; i < m_; ++i) position_[basis_[i]] = i;
        double cmax = 1.0;
        for (double c : sf.cost) cmax = std::max(cmax, std::abs(c));
        cost_scale_ = cmax;
        double bmax = 1.0;
        for (double v : sf.b) bmax = std::max(bmax, std::abs(v));
        rhs_scale_ = bmax;
        b_work_ = sf.b;
        refactor();
    }

    std::size_t iterations() const { return iterations_; }
    const std::vector<std::size_t>& basis() const { return basis_; }
    const std::vector<double>& xb() const { return xb_; }

    bool has_basic_artificial() const {
        for (std::size_t c : basis_) {
            if (sf_.kind[c] == ColumnKind::Artificial) return true;
        }
        return false;
    }

    /// Runs the simplex for the given cost vector. Returns Optimal, Unbounded or MaxIterReached.
    /// On a degenerate stall the basic values are shifted by small random amounts; the shift
    /// is removed at the end and any infeasibility it leaves is repaired by dual simplex
    /// pivots before a final unperturbed pass.
    LpStatus run(const std::vector<double>& cost, bool phase_two) {
        cost_ = &cost;
        phase_two_ = phase_two;
        LpStatus st = iterate(true);
        if (perturbed_) unperturb();
        // Harris steps may leave basics slightly below zero; a few rounds of dual
        // repair followed by primal passes recover the exact vertex.
        for (int round = 0; round < 4 && st == LpStatus::Optimal; ++round) {
            const std::size_t before = iterations_;
            st = dual_cleanup();
            if (st != LpStatus::Optimal || iterations_ == before) break;
            st = iterate(false);
        }
        return st;
    }

    LpStatus iterate(bool allow_perturbation) {
        const bool phase_two = phase_two_;
        std::size_t stall = 0;
        double best = objective();
        bool bland = false;
        std::vector<double> y(m_);
        std::vector<double> alpha(m_);
        const double dtol = opt_.optimality_tol * (phase_two ? cost_scale_ : 1.0);

        while (true) {
            if (iterations_ >= opt_.max_iterations) return LpStatus::MaxIterReached;
            compute_duals(y);
            const std::size_t q = bland ? price_bland(y, dtol) : price_dantzig(y, dtol);
            if (q == kNone) return LpStatus::Optimal;
            ftran_column(q, alpha);
            std::size_t r = bland ? ratio_textbook(alpha) : ratio_harris(alpha);
            if (r != kNone && std::abs(alpha[r]) < kRecheckPivot && !etas_.empty()) {
                refactor();
                ftran_column(q, alpha);
                r = bland ? ratio_textbook(alpha) : ratio_harris(alpha);
            }
            if (r == kNone) return LpStatus::Unbounded;
            pivot(q, r, alpha);
            ++iterations_;

            const double obj = objective();
            if (obj < best - 1e-12 * (1.0 + std::abs(best))) {
                best = obj;
                stall = 0;
                bland = false;
            } else if (++stall >= kStallLimit) {
                if (allow_perturbation && !perturbed_) {
                    perturb();
                    stall = 0;
                    best = objective();
                } else {
                    bland = true;
                }
            }
        }
    }

    double objective() const {
        double v = 0.0;
        if (cost_ == nullptr) return v;
        for (std::size_t i = 0; i < m_; ++i) v += (*cost_)[basis_[i]] * xb_[i];
        return v;
    }

    /// y = B^{-T} c_B
    void compute_duals(std::vector<double>& y) const {
        std::vector<double> w(m_);
        for (std::size_t i = 0; i < m_; ++i) w[i] = (*cost_)[basis_[i]];
        btran(w, y);
    }

    void compute_duals(const std::vector<double>& cost, std::vector<double>& y) const {
        std::vector<double> w(m_);
        for (std::size_t i = 0; i < m_; ++i) w[i] = cost[basis_[i]];
        btran(w, y);
    }

    double column_dot(std::size_t j, const std::vector<double>& y) const {
        double v = 0.0;
        for (std::size_t k = sf_.start[j]; k < sf_.start[j + 1]; ++k) v += sf_.value[k] * y[sf_.index[k]];
        return v;
    }

    void ftran_column(std::size_t j, std::vector<double>& out) const {
        std::vector<double> a(m_, 0.0);
        for (std::size_t k = sf_.start[j]; k < sf_.start[j + 1]; ++k) a[sf_.index[k]] = sf_.value[k];
        ftran(a, out);
    }

    /// Moves column q into the basis at position r (alpha = B^{-1} a_q).
    void pivot(std::size_t q, std::size_t r, const std::vector<double>& alpha) {
        const double ar = alpha[r];
        if (std::abs(ar) < kBreakdownPivot) {
            throw Error(ErrorCode::NumericalBreakdown, "simplex pivot below breakdown threshold");
        }
        const double theta = xb_[r] / ar;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i != r && alpha[i] != 0.0) xb_[i] -= theta * alpha[i];
        }
        xb_[r] = theta;
        position_[basis_[r]] = kNone;
        basis_[r] = q;
        position_[q] = r;

        Eta eta;
        eta.r = r;
        eta.pivot = ar;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i != r && alpha[i] != 0.0) eta.entries.push_back({i, alpha[i]});
        }
        etas_.push_back(std::move(eta));
        if (etas_.size() >= opt_.refactor_interval) refactor();
    }

    void refactor() {
        SparseMatrix basis_matrix(static_cast<int>(m_), static_cast<int>(m_));
        std::vector<Eigen::Triplet<double, int>> trip;
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t j = basis_[i];
            for (std::size_t k = sf_.start[j]; k < sf_.start[j + 1]; ++k) {
                trip.emplace_back(static_cast<int>(sf_.index[k]), static_cast<int>(i), sf_.value[k]);
            }
        }
        basis_matrix.setFromTriplets(trip.begin(), trip.end());
        basis_matrix.makeCompressed();
        lu_.analyzePattern(basis_matrix);
        lu_.factorize(basis_matrix);
        if (lu_.info() != Eigen::Success) {
            throw Error(ErrorCode::NumericalBreakdown, "basis factorization failed");
        }
        etas_.clear();
        xb_.assign(m_, 0.0);
        ftran(b_work_, xb_);
    }

    /// Shifts every basic value up by a random amount in [1, 2] * 1e-7 * scale by moving
    /// the working right-hand side to b + B shift.
    void perturb() {
        perturbed_ = true;
        std::mt19937_64 rng(0x5eed5eedULL + iterations_);
        std::uniform_real_distribution<double> u(1.0, 2.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const double shift = 1e-7 * rhs_scale_ * u(rng);
            const std::size_t j = basis_[i];
            for (std::size_t k = sf_.start[j]; k < sf_.start[j + 1]; ++k) {
                b_work_[sf_.index[k]] += shift * sf_.value[k];
            }
            xb_[i] += shift;
        }
    }

    void unperturb() {
        perturbed_ = false;
        b_work_ = sf_.b;
        refactor();
    }

    /// Dual simplex pivots from a dual feasible basis until x_B >= -tol.
    LpStatus dual_cleanup() {
        // Tighter than the feasibility tolerance: the shift is gone and the exact vertex is wanted.
        const double ftol = 1e-3 * opt_.feasibility_tol * rhs_scale_;
        std::vector<double> y(m_), e(m_), rho(m_), alpha(m_);
        std::vector<bool> excluded(n_, false);
        std::vector<bool> tolerated(m_, false);
        struct Candidate {
            std::size_t j;
            double d;
            double mag;
        };
        std::vector<Candidate> cand;
        bool fresh = etas_.empty();
        while (true) {
            if (iterations_ >= opt_.max_iterations) return LpStatus::MaxIterReached;
            std::size_t r = kNone;
            for (std::size_t i = 0; i < m_; ++i) {
                if (xb_[i] < -ftol && !tolerated[i] && (r == kNone || xb_[i] < xb_[r])) r = i;
            }
            if (r == kNone) return LpStatus::Optimal;
            compute_duals(y);
            std::fill(e.begin(), e.end(), 0.0);
            e[r] = 1.0;
            btran(e, rho);
            // Harris two-pass ratio test on the reduced costs.
            const double dtol = opt_.optimality_tol * (phase_two_ ? cost_scale_ : 1.0);
            cand.clear();
            double bound = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n_; ++j) {
                if (!may_enter(j) || excluded[j]) continue;
                const double arj = column_dot(j, rho);
                if (arj >= -kPivotTol) continue;
                const double dj = std::max(0.0, (*cost_)[j] - column_dot(j, y));
                cand.push_back({j, dj, -arj});
                bound = std::min(bound, (dj + dtol) / -arj);
            }
            std::size_t q = kNone;
            double best_mag = 0.0;
            for (const auto& c : cand) {
                if (c.d / c.mag <= bound && c.mag > best_mag) {
                    best_mag = c.mag;
                    q = c.j;
                }
            }
            if (q == kNone) {
                // Nothing can repair this row. Within the regular tolerance it is round-off.
                if (xb_[r] >= -opt_.feasibility_tol * rhs_scale_) {
                    tolerated[r] = true;
                    continue;
                }
                throw Error(ErrorCode::NumericalBreakdown, "dual repair found no entering column");
            }
            ftran_column(q, alpha);
            // Row and column views of the pivot must agree; otherwise refactor, and if a
            // fresh factorization still disagrees, leave that column out of this step.
            if (std::abs(alpha[r] + best_mag) > 1e-6 * best_mag || std::abs(alpha[r]) < kRecheckPivot) {
                if (!fresh) {
                    refactor();
                    fresh = true;
                } else {
                    excluded[q] = true;
                }
                continue;
            }
            pivot(q, r, alpha);
            ++iterations_;
            fresh = etas_.empty();
            std::fill(excluded.begin(), excluded.end(), false);
            std::fill(tolerated.begin(), tolerated.end(), false);
        }
    }

    /// Replaces a basic artificial at position r by a non-artificial column, if any
    /// has a usable entry in row r of B^{-1} A. Returns false for redundant rows, whose
    /// artificial is then pinned: its row of B^{-1} A is zero up to round-off.
    bool drive_out(std::size_t r) {
        std::vector<double> e(m_, 0.0), rho(m_);
        e[r] = 1.0;
        btran(e, rho);
        std::size_t best = kNone;
        double best_mag = kDriveOutTol;
        for (std::size_t j = 0; j < n_; ++j) {
            if (position_[j] != kNone || sf_.kind[j] == ColumnKind::Artificial) continue;
            const double v = std::abs(column_dot(j, rho));
            if (v > best_mag) {
                best_mag = v;
                best = j;
            }
        }
        if (best == kNone) {
            pinned_[basis_[r]] = true;
            return false;
        }
        std::vector<double> alpha(m_);
        ftran_column(best, alpha);
        if (std::abs(alpha[r]) < kRecheckPivot && !etas_.empty()) {
            refactor();
            ftran_column(best, alpha);
        }
        if (std::abs(alpha[r]) < kDriveOutTol) {
            pinned_[basis_[r]] = true;
            return false;
        }
        pivot(best, r, alpha);
        return true;
    }

    std::size_t position(std::size_t j) const { return position_[j]; }

    /// Ratio test for the alternative-optimum probe: step length of entering column j.
    double probe_step(std::size_t j) const {
        std::vector<double> alpha(m_);
        ftran_column(j, alpha);
        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
            if (alpha[i] > kPivotTol) theta = std::min(theta, std::max(0.0, xb_[i]) / alpha[i]);
            if (sf_.kind[basis_[i]] == ColumnKind::Artificial && std::abs(alpha[i]) > kPivotTol) return 0.0;
        }
        return theta;
    }

    void ftran(const std::vector<double>& rhs, std::vector<double>& out) const {
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(m_));
        Eigen::VectorXd v = lu_.solve(b);
        for (const auto& eta : etas_) {
            const double vr = v[static_cast<Eigen::Index>(eta.r)] / eta.pivot;
            v[static_cast<Eigen::Index>(eta.r)] = vr;
            if (vr != 0.0) {
                for (const auto& [i, a] : eta.entries) v[static_cast<Eigen::Index>(i)] -= a * vr;
            }
        }
        out.assign(v.data(), v.data() + m_);
    }

    void btran(const std::vector<double>& rhs, std::vector<double>& out) const {
        Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(m_));
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double acc = w[static_cast<Eigen::Index>(it->r)];
            for (const auto& [i, a] : it->entries) acc -= a * w[static_cast<Eigen::Index>(i)];
            w[static_cast<Eigen::Index>(it->r)] = acc / it->pivot;
        }
        Eigen::VectorXd y = lu_.transpose().solve(w);
        out.assign(y.data(), y.data() + m_);
    }

private:
    bool may_enter(std::size_t j) const {
        return position_[j] == kNone && sf_.kind[j] != ColumnKind::Artificial;
    }

    std::size_t price_dantzig(const std::vector<double>& y, double dtol) const {
        std::size_t best = kNone;
        double best_d = -dtol;
        for (std::size_t j = 0; j < n_; ++j) {
            if (!may_enter(j)) continue;
            const double d = (*cost_)[j] - column_dot(j, y);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        return best;
    }

    std::size_t price_bland(const std::vector<double>& y, double dtol) const {
        for (std::size_t j = 0; j < n_; ++j) {
            if (!may_enter(j)) continue;
            if ((*cost_)[j] - column_dot(j, y) < -dtol) return j;
        }
        return kNone;
    }

    // Phase 2 artificials sit at zero. A usable entry forces them out; pinned ones are on
    // redundant rows, where any entry is round-off and pivoting on it makes B singular.
    bool forced_out(std::size_t i, const std::vector<double>& alpha) const {
        return phase_two_ && sf_.kind[basis_[i]] == ColumnKind::Artificial && !pinned_[basis_[i]] &&
               std::abs(alpha[i]) > kDriveOutTol;
    }

    bool skip_row(std::size_t i) const { return phase_two_ && sf_.kind[basis_[i]] == ColumnKind::Artificial; }

    std::size_t ratio_harris(const std::vector<double>& alpha) const {
        const double ftol = opt_.feasibility_tol * rhs_scale_;
        std::size_t forced = kNone;
        double theta_max = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
            if (forced_out(i, alpha)) {
                if (forced == kNone || std::abs(alpha[i]) > std::abs(alpha[forced])) forced = i;
                continue;
            }
            if (skip_row(i)) continue;
            if (alpha[i] > kPivotTol) theta_max = std::min(theta_max, (xb_[i] + ftol) / alpha[i]);
        }
        if (forced != kNone) return forced;
        if (!std::isfinite(theta_max)) return kNone;
        std::size_t r = kNone;
        for (std::size_t i = 0; i < m_; ++i) {
            if (alpha[i] <= kPivotTol || skip_row(i)) continue;
            if (xb_[i] / alpha[i] > theta_max) continue;
            if (r == kNone || alpha[i] > alpha[r] ||
                (alpha[i] == alpha[r] && basis_[i] < basis_[r])) {
                r = i;
            }
        }
        return r;
    }

    std::size_t ratio_textbook(const std::vector<double>& alpha) const {
        const double ftol = opt_.feasibility_tol * rhs_scale_;
        std::size_t r = kNone;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
            if (forced_out(i, alpha)) return i;
            if (alpha[i] <= kPivotTol || skip_row(i)) continue;
            // Values within the feasibility tolerance count as degenerate so that
            // Bland's lowest-index tie rule actually applies.
            const double t = (xb_[i] <= ftol ? 0.0 : xb_[i]) / alpha[i];
            const double tie = 1e-12 * std::max(1.0, best);
            if (r == kNone || t < best - tie || (t <= best + tie && basis_[i] < basis_[r])) {
                r = i;
                best = t;
            }
        }
        return r;
    }

    const StandardForm& sf_;
    const ExactOptions& opt_;
    std::size_t m_;
    std::size_t n_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> position_;
    std::vector<bool> pinned_;
    std::vector<double> xb_;
    std::vector<Eta> etas_;
    mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;  // transpose() is non-const
    const std::vector<double>* cost_ = nullptr;
    bool phase_two_ = false;
    bool perturbed_ = false;
    std::vector<double> b_work_;
    double cost_scale_ = 1.0;
    double rhs_scale_ = 1.0;
    std::size_t iterations_ = 0;
};

std::vector<double> map_row_multipliers(const StandardForm& sf, const std::vector<double>& y_std,
                                        double sign) {
    std::vector<double> y(sf.rows);
    for (std::size_t i = 0; i < sf.rows; ++i) y[i] = sign * sf.flip[i] * y_std[i];
    return y;
}

}  // namespace

LpSolution solve_exact(const LinearProgram& prog, const ExactOptions& options) {
    prog.validate();
    if (prog.num_nonzeros() > options.max_nonzeros) {
        throw Error(ErrorCode::SizeCapExceeded, "program has " + std::to_string(prog.num_nonzeros()) +
                                                    " nonzeros, cap is " +
                                                    std::to_string(options.max_nonzeros));
    }
    const StandardForm sf = to_standard_form(prog);
    const double sense = prog.sense() == ObjectiveSense::Minimize ? 1.0 : -1.0;
    const std::size_t m = sf.rows;
    LpSolution sol;

    if (m == 0) {
        // No constraints: optimal at the lower bounds unless some cost direction is unbounded.
        sol.primal.assign(prog.num_variables(), 0.0);
        sol.status = LpStatus::Optimal;
        for (std::size_t j = 0; j < prog.num_variables(); ++j) {
            const double l = prog.lower_bounds()[j];
            const double c = sense * prog.costs()[j];
            if ((!std::isfinite(l) && c != 0.0) || c < 0.0) sol.status = LpStatus::Unbounded;
            sol.primal[j] = std::isfinite(l) ? l : 0.0;
            sol.objective += prog.costs()[j] * sol.primal[j];
        }
        sol.dual_objective = sol.objective;
        return sol;
    }

    Simplex simplex(sf, options);

    std::vector<double> phase1_cost(sf.cols(), 0.0);
    bool need_phase1 = false;
    for (std::size_t j = 0; j < sf.cols(); ++j) {
        if (sf.kind[j] == ColumnKind::Artificial) {
            phase1_cost[j] = 1.0;
            need_phase1 = true;
        }
    }

    double bmax = 1.0;
    for (double v : sf.b) bmax = std::max(bmax, v);

    if (need_phase1) {
        const LpStatus st = simplex.run(phase1_cost, false);
        sol.iterations = simplex.iterations();
        if (st == LpStatus::MaxIterReached) {
            sol.status = st;
            return sol;
        }
        simplex.refactor();
        if (simplex.objective() > options.feasibility_tol * bmax) {
            std::vector<double> y_std;
            simplex.compute_duals(phase1_cost, y_std);
            sol.status = LpStatus::Infeasible;
            sol.farkas = map_row_multipliers(sf, y_std, 1.0);
            sol.primal.assign(prog.num_variables(), 0.0);
            return sol;
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (sf.kind[simplex.basis()[r]] == ColumnKind::Artificial) simplex.drive_out(r);
        }
    }

    const LpStatus st = simplex.run(sf.cost, true);
    sol.iterations = simplex.iterations();
    sol.status = st;
    simplex.refactor();

    std::vector<double> x_std(sf.cols(), 0.0);
    for (std::size_t i = 0; i < m; ++i) x_std[simplex.basis()[i]] = std::max(0.0, simplex.xb()[i]);

    sol.primal.assign(prog.num_variables(), 0.0);
    for (std::size_t j = 0; j < prog.num_variables(); ++j) {
        const double l = prog.lower_bounds()[j];
        double v = x_std[sf.pos_col[j]];
        if (sf.neg_col[j] != kNone) v -= x_std[sf.neg_col[j]];
        sol.primal[j] = (std::isfinite(l) ? l : 0.0) + v;
    }
    for (std::size_t j = 0; j < prog.num_variables(); ++j) sol.objective += prog.costs()[j] * sol.primal[j];

    std::vector<double> y_std;
    simplex.compute_duals(sf.cost, y_std);
    sol.duals = map_row_multipliers(sf, y_std, sense);

    if (st != LpStatus::Optimal) return sol;

    const OptimalityReport rep = check_optimality(prog, sol);
    sol.dual_objective = rep.dual_objective;
    sol.primal_residual = rep.primal_residual;

    if (options.detect_alternative_optima) {
        double cmax = 1.0;
        for (double c : sf.cost) cmax = std::max(cmax, std::abs(c));
        const double dtol = options.optimality_tol * cmax;
        std::size_t probes = 0;
        for (std::size_t j = 0; j < sf.cols() && probes < 4096 && !sol.alternative_optima; ++j) {
            if (simplex.position(j) != kNone || sf.kind[j] == ColumnKind::Artificial) continue;
            if (std::abs(sf.cost[j] - simplex.column_dot(j, y_std)) > dtol) continue;
            if (sf.twin[j] != kNone && simplex.position(sf.twin[j]) != kNone) continue;
            ++probes;
            if (simplex.probe_step(j) > options.feasibility_tol * bmax) sol.alternative_optima = true;
        }
    }
    return sol;
}

}  // namespace skembed
