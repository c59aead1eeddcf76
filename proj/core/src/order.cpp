#include "skembed/order.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

#include "skembed/embed.hpp"
#include "skembed/envelope.hpp"
#include "skembed/error.hpp"

namespace skembed {

namespace {

constexpr double kNegativeTol = 1e-10;
constexpr double kBoundaryTol = 1e-9;

void require_probabilities(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    for (const auto* m : {&mu, &nu}) {
        if (!m->supported_on(lattice)) throw Error(ErrorCode::SupportOffLattice, "measure charges a node outside the domain");
        if (!m->is_probability(1e-12)) throw Error(ErrorCode::NonProbability, "order check needs probability measures");
    }
}

// Interior-node numbering and the sparse matrix I - P restricted to interior nodes.
struct InteriorSystem {
    std::vector<int> idx;
    std::vector<std::size_t> nodes;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::SparseMatrix<double> a;  // I - P_II (row z, column w)

    explicit InteriorSystem(const Lattice& lattice) : idx(lattice.size(), -1) {
        for (std::size_t z = 0; z < lattice.size(); ++z) {
            if (lattice.is_interior(z)) {
                idx[z] = static_cast<int>(nodes.size());
                nodes.push_back(z);
            }
        }
        const int m = static_cast<int>(nodes.size());
        const double p = 1.0 / (2.0 * lattice.dim());
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t z : nodes) {
            trip.emplace_back(idx[z], idx[z], 1.0);
            for (std::size_t w : lattice.neighbors(z)) {
                if (idx[w] >= 0) trip.emplace_back(idx[z], idx[w], -p);
            }
        }
        a.resize(m, m);
        a.setFromTriplets(trip.begin(), trip.end());
        a.makeCompressed();
        if (m > 0) {
            lu.compute(a);
            if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "killed Green operator is singular");
        }
    }
};

}  // namespace

WitnessCheck check_witness(const Lattice& lattice, const std::vector<double>& f, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu) {
    WitnessCheck c;
    if (f.size() != lattice.size()) return c;
    c.subharmonic_residual = std::max(0.0, subharmonic_violation(lattice, f));
    const auto m = mu.to_nodes(lattice);
    const auto n = nu.to_nodes(lattice);
    for (std::size_t z = 0; z < f.size(); ++z) c.violation += f[z] * (m[z] - n[z]);
    c.valid = c.subharmonic_residual <= 1e-9 && c.violation > 1e-10;
    return c;
}

OrderVerdict check_order_lp(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    require_probabilities(lattice, mu, nu);
    OrderVerdict v;
    v.route = OrderRoute::Lp;
    // Group averaging maps embeddings to embeddings, so for invariant marginals the
    // reduced program decides the same question with far fewer rows.
    const bool invariant =
        is_point_group_invariant(mu, lattice.dim(), 1e-12) && is_point_group_invariant(nu, lattice.dim(), 1e-12);
    const FeasibilityResult res = feasibility(lattice, mu, nu, invariant);
    if (res.feasible) {
        v.in_order = true;
        return v;
    }
    // Normalize the certificate so the witness has unit sup norm on beta.
    std::vector<double> f(res.certificate.beta);
    double scale = 0.0;
    for (double b : f) scale = std::max(scale, std::abs(b));
    if (scale == 0.0) scale = 1.0;
    for (double& b : f) b = -b / scale;
    v.witness = envelope_onestep_oracle(lattice, f).values;
    const WitnessCheck c = check_witness(lattice, v.witness, mu, nu);
    v.witness_violation = c.violation;
    v.witness_subharmonic_residual = c.subharmonic_residual;
    return v;
}

OrderVerdict check_order_potential(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    require_probabilities(lattice, mu, nu);
    const std::size_t n = lattice.size();
    const auto mu_n = mu.to_nodes(lattice);
    const auto nu_n = nu.to_nodes(lattice);
    InteriorSystem sys(lattice);
    const int m = static_cast<int>(sys.nodes.size());
    const double p = 1.0 / (2.0 * lattice.dim());

    OrderVerdict v;
    v.route = OrderRoute::Potential;
    v.aggregate.assign(n, 0.0);
    // (I - P^T) M = mu - nu on interior nodes: transpose solve of I - P_II.
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = mu_n[sys.nodes[i]] - nu_n[sys.nodes[i]];
    Eigen::VectorXd msol = m > 0 ? Eigen::VectorXd(sys.lu.transpose().solve(rhs)) : Eigen::VectorXd();
    std::size_t worst = n;
    v.min_aggregate = 0.0;
    for (int i = 0; i < m; ++i) {
        v.aggregate[sys.nodes[i]] = msol[i];
        if (msol[i] < v.min_aggregate) {
            v.min_aggregate = msol[i];
            worst = sys.nodes[i];
        }
    }

    std::size_t worst_b = n;
    double worst_r = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
        if (lattice.is_interior(b)) continue;
        double r = mu_n[b] - nu_n[b];
        for (std::size_t w : lattice.neighbors(b)) {
            if (lattice.is_interior(w)) r += p * v.aggregate[w];
        }
        if (std::abs(r) > std::abs(worst_r)) {
            worst_r = r;
            worst_b = b;
        }
    }
    v.boundary_residual = std::abs(worst_r);

    const bool negative = v.min_aggregate < -kNegativeTol;
    const bool mismatch = v.boundary_residual > kBoundaryTol;
    v.in_order = !negative && !mismatch;
    if (v.in_order) return v;

    v.witness.assign(n, 0.0);
    if (negative) {
        // f = -G(., z0): G(., z0) solves (I - P_II) G = e_{z0}, zero on the boundary.
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e[sys.idx[worst]] = 1.0;
        const Eigen::VectorXd g = sys.lu.solve(e);
        for (int i = 0; i < m; ++i) v.witness[sys.nodes[i]] = -g[i];
    } else {
        // f = sign(r) h_b, h_b(y) = probability of exiting at b from y.
        Eigen::VectorXd rhs_b = Eigen::VectorXd::Zero(m);
        for (std::size_t w : lattice.neighbors(worst_b)) {
            if (lattice.is_interior(w)) rhs_b[sys.idx[w]] = p;
        }
        const Eigen::VectorXd hb = m > 0 ? Eigen::VectorXd(sys.lu.solve(rhs_b)) : Eigen::VectorXd();
        const double sgn = worst_r > 0.0 ? 1.0 : -1.0;
        for (int i = 0; i < m; ++i) v.witness[sys.nodes[i]] = sgn * hb[i];
        v.witness[worst_b] = sgn;
    }
    const WitnessCheck c = check_witness(lattice, v.witness, mu, nu);
    v.witness_violation = c.violation;
    v.witness_subharmonic_residual = c.subharmonic_residual;
    return v;
}

}  // namespace skembed
