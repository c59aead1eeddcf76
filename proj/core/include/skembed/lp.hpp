#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace skembed {

enum class RowSense { Equal, LessEqual, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded, MaxIterReached };

const char* to_string(LpStatus status);

struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

/// Sparse linear program: optimize c^T x subject to row constraints and x >= lower.
/// A lower bound of -infinity makes a variable free.
class LinearProgram {
public:
    static constexpr double kFree = -std::numeric_limits<double>::infinity();

    std::size_t add_variable(double cost, double lower = 0.0);
    std::size_t add_row(RowSense sense, double rhs);
    void add_coefficient(std::size_t row, std::size_t col, double value);
    void set_sense(ObjectiveSense sense) { sense_ = sense; }
    void set_cost(std::size_t col, double cost) { costs_.at(col) = cost; }

    std::size_t num_variables() const noexcept { return costs_.size(); }
    std::size_t num_rows() const noexcept { return rhs_.size(); }
    std::size_t num_nonzeros() const noexcept { return triplets_.size(); }
    ObjectiveSense sense() const noexcept { return sense_; }
    const std::vector<double>& costs() const noexcept { return costs_; }
    const std::vector<double>& lower_bounds() const noexcept { return lower_; }
    const std::vector<RowSense>& row_senses() const noexcept { return senses_; }
    const std::vector<double>& rhs() const noexcept { return rhs_; }
    const std::vector<Triplet>& triplets() const noexcept { return triplets_; }

    /// Marks the program as produced by the embedding builder (required by solve_entropic).
    void mark_embedding_shaped(bool v = true) { embedding_shaped_ = v; }
    bool embedding_shaped() const noexcept { return embedding_shaped_; }

    /// Throws InvalidProgram on out-of-range indices or non-finite data.
    void validate() const;

    /// A x for the given primal vector.
    std::vector<double> row_activity(std::span<const double> x) const;

    /// Sparse-triplet text dump:
    ///   line 1: "skembed-lp <vars> <rows> <nnz> <min|max>"
    ///   then one "c <j> <cost> <lower>" per variable,
    ///   one "r <i> <E|L|G> <rhs>" per row, one "a <i> <j> <value>" per nonzero.
    std::string to_triplet_text() const;

private:
    std::vector<double> costs_;
    std::vector<double> lower_;
    std::vector<RowSense> senses_;
    std::vector<double> rhs_;
    std::vector<Triplet> triplets_;
    ObjectiveSense sense_ = ObjectiveSense::Minimize;
    bool embedding_shaped_ = false;
};

/// Solver output. Duals follow the Lagrangian convention for the program's own
/// sense: at a minimum c - A^T y >= 0 on variables at their lower bound, y <= 0 on
/// <= rows and y >= 0 on >= rows (all signs flip for maximization).
struct LpSolution {
    LpStatus status = LpStatus::MaxIterReached;
    std::vector<double> primal;
    std::vector<double> duals;
    double objective = 0.0;
    double dual_objective = 0.0;
    /// Farkas multipliers when Infeasible: y^T A <= 0 on columns (= 0 on free ones),
    /// y <= 0 on <= rows, y >= 0 on >= rows and y^T (b - A l) > 0.
    std::vector<double> farkas;
    std::size_t iterations = 0;
    /// A nonbasic column with zero reduced cost admits a nondegenerate move.
    bool alternative_optima = false;
    double primal_residual = 0.0;
};

struct ExactOptions {
    std::size_t max_nonzeros = 200000;
    std::size_t max_iterations = 2000000;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    std::size_t refactor_interval = 64;
    bool detect_alternative_optima = true;
};

/// Revised simplex (two-phase, sparse LU with eta updates). Dantzig pricing with
/// lowest-index tie-breaking and a Bland fallback on stalls, so results are
/// deterministic. The final basis is refactored and x_B, y recomputed.
LpSolution solve_exact(const LinearProgram& prog, const ExactOptions& options = {});

struct EntropicOptions {
    double epsilon = 1e-2;
    std::size_t max_iter = 20000;  // sweeps over all rows, summed over epsilon stages
    double tol = 1e-9;             // max row residual
    bool epsilon_scaling = true;
};

/// Entropic regularization min c^T x + eps sum x (log x - 1) over {Ax = b}, solved by
/// cyclic dual coordinate ascent (generalized iterative scaling in log domain).
/// Requires an embedding-shaped program: equality rows, zero lower bounds.
LpSolution solve_entropic(const LinearProgram& prog, const EntropicOptions& options = {});

struct OptimalityReport {
    double primal_residual = 0.0;  // max row/bound violation
    double dual_residual = 0.0;    // max reduced-cost / dual-sign violation
    double gap = 0.0;              // |primal objective - dual objective|
    double complementarity = 0.0;  // max |(x_j - l_j) * reduced cost_j|
    double dual_objective = 0.0;
};

/// Recomputes all optimality residuals from the raw program data.
OptimalityReport check_optimality(const LinearProgram& prog, const LpSolution& sol);

struct FarkasReport {
    double max_violation = 0.0;  // worst column / sign violation
    double certificate_value = 0.0;  // y^T (b - A l)
    bool valid = false;
};

/// Independent re-check of an infeasibility certificate.
FarkasReport check_farkas(const LinearProgram& prog, std::span<const double> y, double tol = 1e-9);

}  // namespace skembed
