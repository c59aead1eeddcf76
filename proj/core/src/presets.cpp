#include "skembed/presets.hpp"

#include <cmath>
#include <map>

#include "skembed/barrier.hpp"
#include "skembed/error.hpp"

namespace skembed {

namespace {

constexpr double kExactShells = 1e-6;

long squared_norm(const Point& z) {
    return static_cast<long>(z[0]) * z[0] + static_cast<long>(z[1]) * z[1] + static_cast<long>(z[2]) * z[2];
}

LatticeParams exact_params(int d, double h, double outer_radius, double inner_radius = 0.0) {
    LatticeParams p;
    p.d = d;
    p.h = h;
    p.outer_radius = outer_radius;
    p.shell_tol = kExactShells * h;
    p.inner_radius = inner_radius;
    return p;
}

}  // namespace

DiscreteMeasure sphere_measure(const Lattice& lattice, double r) {
    const double h = lattice.spacing();
    long best = -1;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& z : lattice.nodes()) {
        const long k = squared_norm(z);
        const double gap = std::abs(std::sqrt(static_cast<double>(k)) * h - r);
        if (gap < best_gap - 1e-12 || (std::abs(gap - best_gap) <= 1e-12 && k < best)) {
            best_gap = gap;
            best = k;
        }
    }
    std::vector<Atom> atoms;
    for (const auto& z : lattice.nodes()) {
        if (squared_norm(z) == best) atoms.push_back({z, 1.0});
    }
    if (atoms.empty()) throw Error(ErrorCode::EmptyShell, "no node near the requested radius");
    const double w = 1.0 / static_cast<double>(atoms.size());
    for (auto& a : atoms) a.m = w;
    return DiscreteMeasure(std::move(atoms));
}

std::vector<double> exit_rule(const Lattice& lattice, double radius) {
    std::vector<double> rho(lattice.size(), 0.0);
    for (std::size_t z = 0; z < lattice.size(); ++z) {
        if (!lattice.is_interior(z) || lattice.norm(z) >= radius - 1e-9 * lattice.spacing()) rho[z] = 1.0;
    }
    return rho;
}

DiscreteMeasure push_through_policy(const Lattice& lattice, const DiscreteMeasure& mu, const std::vector<double>& rho) {
    std::vector<double> law(lattice.size(), 0.0);
    for (const auto& a : mu.atoms()) {
        const auto idx = lattice.index_of(a.z);
        if (!idx) throw Error(ErrorCode::SupportOffLattice, "start outside the domain");
        const Replay r = replay_policy(lattice, *idx, rho);
        for (std::size_t z = 0; z < lattice.size(); ++z) law[z] += a.m * r.stop[z];
    }
    // Drop round-off atoms, then restore the exact total and point-group invariance.
    DiscreteMeasure out = DiscreteMeasure::from_nodes(lattice, law, 1e-14);
    out = out.scaled(mu.total() / out.total());
    if (is_point_group_invariant(mu, lattice.dim(), 1e-12)) out = symmetrize(out, lattice);
    return out;
}

Instance preset_uniform_shell(int d, double h, double outer_radius, double r1, double r2, double alpha,
                              ObjectiveSense sense) {
    Instance inst;
    inst.name = "uniform-shell";
    inst.lattice = exact_params(d, h, outer_radius);
    const Lattice lat = Lattice::build(inst.lattice);
    inst.mu = sphere_measure(lat, r1);
    inst.nu = push_through_policy(lat, inst.mu, exit_rule(lat, r2));
    inst.alpha = alpha;
    inst.sense = sense;
    return inst;
}

Instance preset_two_shell(int d, double h, double outer_radius, double r1, double r2, double r3, double p,
                          double alpha, ObjectiveSense sense) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "stop probability outside [0,1]");
    if (!(r3 > r2)) throw Error(ErrorCode::InvalidArgument, "two-shell preset needs r3 > r2");
    Instance inst;
    inst.name = "two-shell";
    inst.lattice = exact_params(d, h, outer_radius);
    const Lattice lat = Lattice::build(inst.lattice);
    inst.mu = sphere_measure(lat, r1);
    const double eps = 1e-9 * h;
    std::vector<double> rho(lat.size(), 0.0);
    for (std::size_t z = 0; z < lat.size(); ++z) {
        if (!lat.is_interior(z) || lat.norm(z) >= r3 - eps) {
            rho[z] = 1.0;
            continue;
        }
        if (lat.norm(z) < r2 - eps) continue;
        // First layer outside r2: nodes with a neighbor strictly inside.
        for (std::size_t w : lat.neighbors(z)) {
            if (lat.norm(w) < r2 - eps) {
                rho[z] = p;
                break;
            }
        }
    }
    inst.nu = push_through_policy(lat, inst.mu, rho);
    inst.alpha = alpha;
    inst.sense = sense;
    return inst;
}

Instance preset_annulus_pair(bool annulus) {
    Instance inst;
    inst.name = annulus ? "annulus-pair-U" : "annulus-pair-V";
    const LatticeParams ball = exact_params(2, 0.5, 4.0);
    const Lattice v = Lattice::build(ball);
    inst.mu = sphere_measure(v, 2.0);
    inst.nu = push_through_policy(v, inst.mu, exit_rule(v, 3.0));
    inst.lattice = annulus ? exact_params(2, 0.5, 4.0, 1.0) : ball;
    inst.alpha = 1.0;
    return inst;
}

Instance preset_overlap_pair(int d, double h, double outer_radius, double center_radius, double r1, double r2,
                             double alpha) {
    Instance inst = preset_uniform_shell(d, h, outer_radius, r1, r2, alpha, ObjectiveSense::Minimize);
    inst.name = "overlap-pair";
    const Lattice lat = Lattice::build(inst.lattice);
    const DiscreteMeasure c =
        center_radius <= 0.0 ? DiscreteMeasure::dirac({0, 0, 0}) : sphere_measure(lat, center_radius);
    inst.mu = c.scaled(0.5).plus(inst.mu.scaled(0.5));
    inst.nu = c.scaled(0.5).plus(inst.nu.scaled(0.5));
    return inst;
}

}  // namespace skembed
