#include "skembed/embed.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

namespace skembed {

double transport_cost(const Point& x, const Point& z, double alpha, double h) {
    const double r = physical_distance(x, z, h);
    return r > 0.0 ? std::pow(r, alpha) : 0.0;
}

OccupationBlock add_occupation_block(LinearProgram& lp, const Lattice& lattice, std::size_t start) {
    const std::size_t n = lattice.size();
    const double p = 1.0 / (2.0 * lattice.dim());
    OccupationBlock block;
    block.m_col.assign(n, kNoColumn);
    block.s_col.resize(n);
    block.row.resize(n);
    for (std::size_t z = 0; z < n; ++z) {
        if (lattice.is_interior(z)) block.m_col[z] = lp.add_variable(0.0);
        block.s_col[z] = lp.add_variable(0.0);
    }
    for (std::size_t z = 0; z < n; ++z) {
        block.row[z] = lp.add_row(RowSense::Equal, z == start ? 1.0 : 0.0);
        if (block.m_col[z] != kNoColumn) lp.add_coefficient(block.row[z], block.m_col[z], 1.0);
        lp.add_coefficient(block.row[z], block.s_col[z], 1.0);
        // Inflow from interior neighbors (the neighbor relation is symmetric).
        for (std::size_t w : lattice.neighbors(z)) {
            if (block.m_col[w] != kNoColumn) lp.add_coefficient(block.row[z], block.m_col[w], -p);
        }
    }
    return block;
}

namespace {

void check_measure(const DiscreteMeasure& m, const Lattice& lattice, const char* name) {
    if (!m.supported_on(lattice)) {
        throw Error(ErrorCode::SupportOffLattice, std::string(name) + " charges a node outside the domain");
    }
    if (!m.is_probability(1e-12)) {
        throw Error(ErrorCode::NonProbability, std::string(name) + " has total mass " + std::to_string(m.total()));
    }
}

// Orbits of `group` acting on node indices; representatives are the lowest index.
void node_orbits(const Lattice& lattice, const std::vector<SignedPermutation>& group,
                 std::vector<std::size_t>& orbit_of, std::vector<std::size_t>& rep,
                 std::vector<std::size_t>& size) {
    const std::size_t none = kNoColumn;
    orbit_of.assign(lattice.size(), none);
    rep.clear();
    size.clear();
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        if (orbit_of[i] != none) continue;
        const std::size_t id = rep.size();
        rep.push_back(i);
        size.push_back(0);
        for (const auto& g : group) {
            const std::size_t j = lattice.image(g, i);
            if (orbit_of[j] == none) {
                orbit_of[j] = id;
                ++size[id];
            }
        }
    }
}

}  // namespace

EmbeddingProblem build_problem(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               double alpha, ObjectiveSense sense, const EmbeddingOptions& options) {
    check_measure(mu, lattice, "mu");
    check_measure(nu, lattice, "nu");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");

    EmbeddingProblem prob;
    prob.lattice = &lattice;
    prob.mu = mu;
    prob.nu = nu;
    prob.alpha = alpha;
    prob.sense = sense;
    prob.options = options;

    std::vector<SignedPermutation> group{SignedPermutation{}};
    if (options.symmetry_reduction) {
        if (!is_point_group_invariant(mu, lattice.dim()) || !is_point_group_invariant(nu, lattice.dim())) {
            throw Error(ErrorCode::NotSymmetric, "symmetry reduction needs point-group-invariant mu and nu");
        }
        group = point_group(lattice.dim());
    }

    node_orbits(lattice, group, prob.class_of, prob.class_rep, prob.class_size);
    const auto mu_nodes = mu.to_nodes(lattice);
    const auto nu_nodes = nu.to_nodes(lattice);
    const double h = lattice.spacing();
    const double p = 1.0 / (2.0 * lattice.dim());
    LinearProgram& lp = prob.program;
    lp.set_sense(sense);

    std::vector<bool> covered(lattice.size(), false);
    for (std::size_t x = 0; x < lattice.size(); ++x) {
        if (mu_nodes[x] <= 0.0 || covered[x]) continue;
        ReducedStart st;
        st.node = x;
        st.mu = mu_nodes[x];
        std::vector<SignedPermutation> stabilizer;
        for (const auto& g : group) {
            const std::size_t gx = lattice.image(g, x);
            if (gx == x) stabilizer.push_back(g);
            if (!covered[gx]) {
                covered[gx] = true;
                st.starts.push_back(gx);
                st.maps.push_back(g);
            }
        }
        node_orbits(lattice, stabilizer, st.orbit_of, st.orbit_rep, st.orbit_size);
        const std::size_t n_orb = st.orbit_rep.size();
        const double weight = st.mu * static_cast<double>(st.starts.size());
        st.m_col.assign(n_orb, kNoColumn);
        st.s_col.resize(n_orb);
        st.row.resize(n_orb);
        for (std::size_t o = 0; o < n_orb; ++o) {
            const std::size_t z = st.orbit_rep[o];
            if (lattice.is_interior(z)) st.m_col[o] = lp.add_variable(0.0);
            const double c = options.zero_cost ? 0.0
                                               : weight * static_cast<double>(st.orbit_size[o]) *
                                                     transport_cost(lattice.node(x), lattice.node(z), alpha, h);
            st.s_col[o] = lp.add_variable(c);
        }
        for (std::size_t o = 0; o < n_orb; ++o) {
            const std::size_t z = st.orbit_rep[o];
            st.row[o] = lp.add_row(RowSense::Equal, z == x ? 1.0 : 0.0);
            std::map<std::size_t, double> coef;
            if (st.m_col[o] != kNoColumn) coef[st.m_col[o]] += 1.0;
            coef[st.s_col[o]] += 1.0;
            for (std::size_t w : lattice.neighbors(z)) {
                const std::size_t ow = st.orbit_of[w];
                if (st.m_col[ow] != kNoColumn) coef[st.m_col[ow]] -= p;
            }
            for (const auto& [col, v] : coef) lp.add_coefficient(st.row[o], col, v);
        }
        prob.starts.push_back(std::move(st));
    }

    const std::size_t n_cls = prob.class_rep.size();
    prob.marginal_row.resize(n_cls);
    for (std::size_t c = 0; c < n_cls; ++c) {
        // Boundary is G-invariant, so a class is all boundary or all interior.
        prob.marginal_row[c] = lattice.is_interior(prob.class_rep[c])
                                   ? lp.add_row(RowSense::Equal, nu_nodes[prob.class_rep[c]])
                                   : kNoColumn;
    }
    for (const auto& st : prob.starts) {
        const double weight = st.mu * static_cast<double>(st.starts.size());
        for (std::size_t o = 0; o < st.orbit_rep.size(); ++o) {
            const std::size_t c = prob.class_of[st.orbit_rep[o]];
            if (prob.marginal_row[c] == kNoColumn) continue;
            lp.add_coefficient(prob.marginal_row[c], st.s_col[o],
                               weight * static_cast<double>(st.orbit_size[o]) /
                                   static_cast<double>(prob.class_size[c]));
        }
    }
    lp.mark_embedding_shaped();
    return prob;
}

const StartSolution* StoppingSolution::find_start(std::size_t node) const {
    for (const auto& s : starts) {
        if (s.node == node) return &s;
    }
    return nullptr;
}

std::vector<double> StoppingSolution::terminal_law() const {
    std::vector<double> law(beta.size(), 0.0);
    for (const auto& s : starts) {
        if (law.size() < s.stop.size()) law.resize(s.stop.size(), 0.0);
        for (std::size_t z = 0; z < s.stop.size(); ++z) law[z] += s.mu * s.stop[z];
    }
    return law;
}

namespace {

// Row multipliers (LP duals or Farkas rays) in node coordinates:
// beta(z) = y_class / |class|, J_x(z) = -y_row / (|G x| |O| mu(x)).
void multipliers_to_nodes(const EmbeddingProblem& prob, const std::vector<double>& y, std::vector<double>& beta,
                          std::vector<StartSolution>& starts_out) {
    const Lattice& lat = *prob.lattice;
    const std::size_t n = lat.size();
    beta.assign(n, 0.0);
    for (std::size_t z = 0; z < n; ++z) {
        const std::size_t c = prob.class_of[z];
        if (prob.marginal_row[c] != kNoColumn) beta[z] = y[prob.marginal_row[c]] / static_cast<double>(prob.class_size[c]);
    }
    for (auto& out : starts_out) out.value.assign(n, 0.0);
    std::size_t k = 0;
    for (const auto& st : prob.starts) {
        const double scale = static_cast<double>(st.starts.size()) * st.mu;
        for (std::size_t i = 0; i < st.starts.size(); ++i) {
            const SignedPermutation inv = st.maps[i].inverse();
            auto& out = starts_out[k + i];
            for (std::size_t z = 0; z < n; ++z) {
                const std::size_t o = st.orbit_of[lat.image(inv, z)];
                out.value[z] = -y[st.row[o]] / (scale * static_cast<double>(st.orbit_size[o]));
            }
        }
        k += st.starts.size();
    }
}

std::vector<StartSolution> empty_starts(const EmbeddingProblem& prob) {
    std::vector<StartSolution> out;
    for (const auto& st : prob.starts) {
        for (std::size_t s : st.starts) {
            StartSolution ss;
            ss.node = s;
            ss.mu = st.mu;
            out.push_back(std::move(ss));
        }
    }
    return out;
}

void sort_starts(std::vector<StartSolution>& starts) {
    std::sort(starts.begin(), starts.end(),
              [](const StartSolution& a, const StartSolution& b) { return a.node < b.node; });
}

EmbeddingCertificate make_certificate(const EmbeddingProblem& prob, const std::vector<double>& farkas) {
    EmbeddingCertificate cert;
    cert.raw = farkas;
    auto starts = empty_starts(prob);
    multipliers_to_nodes(prob, farkas, cert.beta, starts);
    sort_starts(starts);
    const auto nu_nodes = prob.nu.to_nodes(*prob.lattice);
    double margin = 0.0;
    for (std::size_t z = 0; z < nu_nodes.size(); ++z) margin += cert.beta[z] * nu_nodes[z];
    for (auto& s : starts) {
        margin -= s.mu * s.value[s.node];
        cert.start_nodes.push_back(s.node);
        cert.values.push_back(std::move(s.value));
    }
    cert.margin = margin;
    return cert;
}

// Killed-walk operator restricted to interior nodes: A = I - P_II.
struct InteriorSystem {
    std::vector<int> idx;  // node -> interior index, -1 on the boundary
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

void factor_interior(const Lattice& lat, InteriorSystem& sys) {
    const std::size_t n = lat.size();
    sys.idx.assign(n, -1);
    int m = 0;
    for (std::size_t z = 0; z < n; ++z) {
        if (lat.is_interior(z)) sys.idx[z] = m++;
    }
    const double p = 1.0 / (2.0 * lat.dim());
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t z = 0; z < n; ++z) {
        if (sys.idx[z] < 0) continue;
        trip.emplace_back(sys.idx[z], sys.idx[z], 1.0);
        for (std::size_t w : lat.neighbors(z)) {
            if (sys.idx[w] >= 0) trip.emplace_back(sys.idx[z], sys.idx[w], -p);
        }
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(trip.begin(), trip.end());
    sys.lu.compute(a);
    if (sys.lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "interior walk operator is singular");
}

// Exit law of the signed initial law pi: pi on the boundary plus the flux of the
// interior occupation u = pi_I + P_II^T u. P_II is symmetric, so A^T = A.
std::vector<double> exit_law(const Lattice& lat, InteriorSystem& sys, const std::vector<double>& pi) {
    const std::size_t n = lat.size();
    const double p = 1.0 / (2.0 * lat.dim());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.lu.rows());
    for (std::size_t z = 0; z < n; ++z) {
        if (sys.idx[z] >= 0) rhs[sys.idx[z]] = pi[z];
    }
    const Eigen::VectorXd u = sys.lu.solve(rhs);
    std::vector<double> out(n, 0.0);
    for (std::size_t z = 0; z < n; ++z) {
        if (sys.idx[z] >= 0) continue;
        out[z] = pi[z];
        for (std::size_t w : lat.neighbors(z)) {
            if (sys.idx[w] >= 0) out[z] += p * u[sys.idx[w]];
        }
    }
    return out;
}

// Harmonic function with boundary values e_b.
std::vector<double> harmonic_measure_of(const Lattice& lat, InteriorSystem& sys, std::size_t b) {
    const double p = 1.0 / (2.0 * lat.dim());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.lu.rows());
    for (std::size_t w : lat.neighbors(b)) {
        if (sys.idx[w] >= 0) rhs[sys.idx[w]] += p;
    }
    const Eigen::VectorXd v = sys.lu.solve(rhs);
    std::vector<double> phi(lat.size(), 0.0);
    for (std::size_t z = 0; z < lat.size(); ++z) phi[z] = sys.idx[z] >= 0 ? v[sys.idx[z]] : (z == b ? 1.0 : 0.0);
    return phi;
}

constexpr double kExitLawTol = 1e-10;

// A harmonic phi separates mu from nu when their exit laws differ; beta = J_x = phi
// meets every cone condition with equality.
std::optional<EmbeddingCertificate> exit_law_certificate(const EmbeddingProblem& prob) {
    const Lattice& lat = *prob.lattice;
    const auto mu_nodes = prob.mu.to_nodes(lat);
    const auto nu_nodes = prob.nu.to_nodes(lat);
    std::vector<double> pi(lat.size());
    for (std::size_t z = 0; z < lat.size(); ++z) pi[z] = mu_nodes[z] - nu_nodes[z];
    InteriorSystem sys;
    factor_interior(lat, sys);
    const auto e = exit_law(lat, sys, pi);
    std::size_t worst = 0;
    for (std::size_t z = 1; z < e.size(); ++z) {
        if (std::abs(e[z]) > std::abs(e[worst])) worst = z;
    }
    if (e.empty() || std::abs(e[worst]) <= kExitLawTol) return std::nullopt;
    auto phi = harmonic_measure_of(lat, sys, worst);
    // sum phi (nu - mu) = -e(worst); flip so the margin is positive.
    const double sign = e[worst] > 0.0 ? -1.0 : 1.0;
    for (double& v : phi) v *= sign;
    EmbeddingCertificate cert;
    cert.beta = phi;
    double margin = 0.0;
    for (std::size_t z = 0; z < lat.size(); ++z) margin += phi[z] * (nu_nodes[z] - mu_nodes[z]);
    for (std::size_t x = 0; x < lat.size(); ++x) {
        if (mu_nodes[x] <= 0.0) continue;
        cert.start_nodes.push_back(x);
        cert.values.push_back(phi);
    }
    cert.margin = margin;
    return cert;
}

}  // namespace

double exit_law_mismatch(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    const auto mu_nodes = mu.to_nodes(lattice);
    const auto nu_nodes = nu.to_nodes(lattice);
    std::vector<double> pi(lattice.size());
    for (std::size_t z = 0; z < lattice.size(); ++z) pi[z] = mu_nodes[z] - nu_nodes[z];
    InteriorSystem sys;
    factor_interior(lattice, sys);
    double worst = 0.0;
    for (double v : exit_law(lattice, sys, pi)) worst = std::max(worst, std::abs(v));
    return worst;
}

StoppingSolution expand_solution(const EmbeddingProblem& prob, const LpSolution& lp) {
    const Lattice& lat = *prob.lattice;
    const std::size_t n = lat.size();
    StoppingSolution sol;
    sol.status = lp.status;
    sol.alpha = prob.alpha;
    sol.sense = prob.sense;
    sol.objective = lp.objective;
    sol.alternative_optima = lp.alternative_optima;
    sol.starts = empty_starts(prob);

    std::size_t k = 0;
    for (const auto& st : prob.starts) {
        for (std::size_t i = 0; i < st.starts.size(); ++i) {
            const SignedPermutation inv = st.maps[i].inverse();
            auto& out = sol.starts[k + i];
            out.occupation.assign(n, 0.0);
            out.stop.assign(n, 0.0);
            for (std::size_t z = 0; z < n; ++z) {
                const std::size_t o = st.orbit_of[lat.image(inv, z)];
                if (st.m_col[o] != kNoColumn) out.occupation[z] = lp.primal[st.m_col[o]];
                out.stop[z] = lp.primal[st.s_col[o]];
            }
        }
        k += st.starts.size();
    }
    if (lp.duals.size() == prob.program.num_rows()) multipliers_to_nodes(prob, lp.duals, sol.beta, sol.starts);
    if (sol.beta.empty()) sol.beta.assign(n, 0.0);
    sort_starts(sol.starts);

    const auto nu_nodes = prob.nu.to_nodes(lat);
    double dual = 0.0;
    for (std::size_t z = 0; z < n; ++z) dual += sol.beta[z] * nu_nodes[z];
    for (const auto& s : sol.starts) {
        double visits = 0.0;
        for (double v : s.occupation) visits += v;
        sol.expected_steps += s.mu * visits;
        if (!s.value.empty()) dual -= s.mu * s.value[s.node];
    }
    sol.dual_objective = dual;
    return sol;
}

StoppingSolution solve(const EmbeddingProblem& problem, const SolveOptions& options) {
    if (auto cert = exit_law_certificate(problem)) throw InfeasibleEmbeddingError(std::move(*cert));
    if (options.method == SolveMethod::Exact) {
        const LpSolution lp = solve_exact(problem.program, options.exact);
        if (lp.status == LpStatus::Infeasible) throw InfeasibleEmbeddingError(make_certificate(problem, lp.farkas));
        if (lp.status != LpStatus::Optimal) {
            throw Error(ErrorCode::NumericalBreakdown,
                        std::string("embedding LP ended with status ") + to_string(lp.status));
        }
        StoppingSolution sol = expand_solution(problem, lp);
        sol.method = SolveMethod::Exact;
        return sol;
    }
    const LpSolution lp = solve_entropic(problem.program, options.entropic);
    StoppingSolution sol = expand_solution(problem, lp);
    sol.method = SolveMethod::Entropic;
    sol.entropic_epsilon = options.entropic.epsilon;
    return sol;
}

FeasibilityResult feasibility(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              bool symmetry_reduction) {
    EmbeddingOptions opt;
    opt.symmetry_reduction = symmetry_reduction;
    opt.zero_cost = true;
    const EmbeddingProblem prob = build_problem(lattice, mu, nu, 1.0, ObjectiveSense::Minimize, opt);
    FeasibilityResult res;
    if (auto cert = exit_law_certificate(prob)) {
        res.certificate = std::move(*cert);
        return res;
    }
    ExactOptions ex;
    ex.detect_alternative_optima = false;
    const LpSolution lp = solve_exact(prob.program, ex);
    if (lp.status == LpStatus::Optimal) {
        res.feasible = true;
        return res;
    }
    if (lp.status != LpStatus::Infeasible) {
        throw Error(ErrorCode::NumericalBreakdown, std::string("feasibility LP ended with status ") +
                                                       to_string(lp.status));
    }
    res.certificate = make_certificate(prob, lp.farkas);
    return res;
}

DualityReport verify_dual(const StoppingSolution& solution, const Lattice& lattice, const DiscreteMeasure& mu,
                          const DiscreteMeasure& nu, double tol) {
    if (solution.method == SolveMethod::Exact && solution.status != LpStatus::Optimal) {
        throw Error(ErrorCode::NotOptimal, "duality check needs an optimal solution");
    }
    for (const auto& s : solution.starts) {
        if (s.value.empty()) throw Error(ErrorCode::NotOptimal, "solution carries no dual values");
    }
    const bool is_min = solution.sense == ObjectiveSense::Minimize;
    const double h = lattice.spacing();
    const std::size_t n = lattice.size();
    const auto nu_nodes = nu.to_nodes(lattice);
    (void)mu;

    DualityReport rep;
    rep.primal = solution.objective;
    rep.convention = is_min ? "min: J_x >= beta - c, J_x >= P J_x on interior nodes"
                            : "max: J_x <= beta - c, J_x <= P J_x on interior nodes";
    double scale = 1.0;
    for (double b : solution.beta) scale = std::max(scale, std::abs(b));
    rep.tol = tol * scale;

    double dual = 0.0;
    for (std::size_t z = 0; z < n; ++z) dual += solution.beta[z] * nu_nodes[z];
    for (const auto& s : solution.starts) {
        const Point& x = lattice.node(s.node);
        dual -= s.mu * s.value[s.node];
        for (std::size_t z = 0; z < n; ++z) {
            const double reward = solution.beta[z] - transport_cost(x, lattice.node(z), solution.alpha, h);
            const double v = is_min ? reward - s.value[z] : s.value[z] - reward;
            rep.majorant_violation = std::max(rep.majorant_violation, v);
            if (v > rep.tol) ++rep.violations;
            if (!lattice.is_interior(z)) continue;
            double avg = 0.0;
            for (std::size_t w : lattice.neighbors(z)) avg += s.value[w];
            avg /= static_cast<double>(lattice.neighbors(z).size());
            const double hv = is_min ? avg - s.value[z] : s.value[z] - avg;
            rep.harmonic_violation = std::max(rep.harmonic_violation, hv);
            if (hv > rep.tol) ++rep.violations;
        }
    }
    rep.dual = dual;
    rep.gap = std::abs(rep.primal - rep.dual);
    return rep;
}

}  // namespace skembed
