#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "skembed/error.hpp"
#include "skembed/lattice.hpp"
#include "skembed/lp.hpp"
#include "skembed/measures.hpp"

namespace skembed {

inline constexpr std::size_t kNoColumn = std::numeric_limits<std::size_t>::max();

/// Cost |x - z|^alpha in physical units (0 when x = z).
double transport_cost(const Point& x, const Point& z, double alpha, double h);

/// Occupation/stop variables and balance rows for one start, one entry per node:
///   m(z) + s(z) - sum_w P(w,z) m(w) = delta_start(z).
/// m columns exist only on interior nodes. Costs are zero; set them afterwards.
struct OccupationBlock {
    std::vector<std::size_t> m_col;  // kNoColumn on boundary nodes
    std::vector<std::size_t> s_col;
    std::vector<std::size_t> row;
};

OccupationBlock add_occupation_block(LinearProgram& lp, const Lattice& lattice, std::size_t start);

/// One representative start of the reduced program. Variables and balance rows are
/// indexed by orbits of the representative's stabilizer; values are per node.
struct ReducedStart {
    std::size_t node = 0;
    double mu = 0.0;                     // mass of mu at each node of the start orbit
    std::vector<std::size_t> starts;     // all start nodes in the G-orbit
    std::vector<SignedPermutation> maps; // maps[i] sends `node` to starts[i]
    std::vector<std::size_t> orbit_of;   // node -> stabilizer orbit
    std::vector<std::size_t> orbit_rep;
    std::vector<std::size_t> orbit_size;
    std::vector<std::size_t> m_col;      // per orbit; kNoColumn for boundary orbits
    std::vector<std::size_t> s_col;
    std::vector<std::size_t> row;
};

struct EmbeddingOptions {
    bool symmetry_reduction = false;
    /// Drop the objective (feasibility problems).
    bool zero_cost = false;
};

/// Occupation-measure LP for the optimal embedding of nu from mu on a killed walk.
/// Without symmetry reduction the group is trivial and every start is its own
/// representative, so both paths share the same construction.
struct EmbeddingProblem {
    const Lattice* lattice = nullptr;
    DiscreteMeasure mu;
    DiscreteMeasure nu;
    double alpha = 1.0;
    ObjectiveSense sense = ObjectiveSense::Minimize;
    EmbeddingOptions options;

    std::vector<ReducedStart> starts;
    std::vector<std::size_t> class_of;    // node -> marginal class (G-orbit)
    std::vector<std::size_t> class_size;
    std::vector<std::size_t> class_rep;
    /// Per class; kNoColumn on boundary classes. Every harmonic function is a left null
    /// vector of the balance and marginal rows, so the boundary marginals are implied by
    /// the rest once mu and nu have the same exit law. solve() checks that separately.
    std::vector<std::size_t> marginal_row;
    LinearProgram program;
};

/// Throws SupportOffLattice, NonProbability, NotSymmetric (reduction on a
/// non-invariant instance), InvalidArgument (alpha <= 0).
EmbeddingProblem build_problem(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               double alpha, ObjectiveSense sense, const EmbeddingOptions& options = {});

/// Per-start part of a stopping solution, dense over the lattice nodes.
struct StartSolution {
    std::size_t node = 0;
    double mu = 0.0;
    std::vector<double> occupation;  // m_x, zero on boundary nodes
    std::vector<double> stop;        // s_x, total 1
    std::vector<double> value;       // J_x = -u_x / mu(x), empty without duals
};

enum class SolveMethod { Exact, Entropic };

struct StoppingSolution {
    LpStatus status = LpStatus::MaxIterReached;
    SolveMethod method = SolveMethod::Exact;
    double alpha = 1.0;
    ObjectiveSense sense = ObjectiveSense::Minimize;
    std::vector<StartSolution> starts;  // in node order of supp mu
    std::vector<double> beta;           // per node
    double objective = 0.0;
    double dual_objective = 0.0;
    double expected_steps = 0.0;        // E[tau] in walk steps
    bool alternative_optima = false;
    double entropic_epsilon = 0.0;

    const StartSolution* find_start(std::size_t node) const;
    /// sum_x mu(x) s_x
    std::vector<double> terminal_law() const;
};

/// Farkas certificate of an infeasible embedding, in node coordinates:
/// J_x >= beta, J_x >= P J_x on interior nodes, sum beta nu > sum mu(x) J_x(x).
struct EmbeddingCertificate {
    std::vector<double> beta;                 // per node
    std::vector<std::size_t> start_nodes;
    std::vector<std::vector<double>> values;  // J_x per start, per node
    std::vector<double> raw;                  // LP row multipliers; empty for exit-law certificates
    double margin = 0.0;                      // sum beta nu - sum mu J_x(x)
};

class InfeasibleEmbeddingError : public Error {
public:
    explicit InfeasibleEmbeddingError(EmbeddingCertificate cert)
        : Error(ErrorCode::InfeasibleEmbedding, "no stopping rule embeds nu from mu"), cert_(std::move(cert)) {}
    const EmbeddingCertificate& certificate() const noexcept { return cert_; }

private:
    EmbeddingCertificate cert_;
};

struct SolveOptions {
    SolveMethod method = SolveMethod::Exact;
    ExactOptions exact;
    EntropicOptions entropic;
};

/// Largest |exit law of mu - exit law of nu| over boundary nodes. Nonzero means no
/// stopping rule embeds nu, whatever the cost.
double exit_law_mismatch(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Throws InfeasibleEmbeddingError, SizeCapExceeded. Entropic solves that do not
/// converge return status MaxIterReached.
StoppingSolution solve(const EmbeddingProblem& problem, const SolveOptions& options = {});

/// Expands raw LP values (primal and duals of `problem.program`) to node coordinates.
StoppingSolution expand_solution(const EmbeddingProblem& problem, const LpSolution& lp);

struct FeasibilityResult {
    bool feasible = false;
    EmbeddingCertificate certificate;  // meaningful when infeasible
};

FeasibilityResult feasibility(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              bool symmetry_reduction = false);

/// Worst residuals of the dual cone conditions. For min: J_x >= beta - c and
/// J_x >= P J_x; for max both inequalities are reversed (J_x <= beta - c, J_x <= P J_x).
struct DualityReport {
    double primal = 0.0;
    double dual = 0.0;  // sum beta nu - sum mu(x) J_x(x)
    double gap = 0.0;
    double majorant_violation = 0.0;
    double harmonic_violation = 0.0;
    std::size_t violations = 0;  // node-level residuals above tol
    double tol = 1e-8;
    std::string convention;
};

/// Throws NotOptimal unless the solution carries duals with status Optimal
/// (entropic solutions are accepted with any status so the gap can be tracked).
DualityReport verify_dual(const StoppingSolution& solution, const Lattice& lattice, const DiscreteMeasure& mu,
                          const DiscreteMeasure& nu, double tol = 1e-8);

}  // namespace skembed
