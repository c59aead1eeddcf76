#include "skembed/measures.hpp"

#include <algorithm>
#include <cmath>

#include "skembed/error.hpp"
#include "skembed/lp.hpp"

namespace skembed {

namespace {

std::vector<Atom> normalize_atoms(std::vector<Atom> atoms) {
    for (const auto& a : atoms) {
        if (!(a.m >= 0.0) || !std::isfinite(a.m)) {
            throw Error(ErrorCode::InvalidArgument, "measure atoms must be finite and nonnegative");
        }
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.z < b.z; });
    std::vector<Atom> out;
    for (const auto& a : atoms) {
        if (!out.empty() && out.back().z == a.z) {
            out.back().m += a.m;
        } else {
            out.push_back(a);
        }
    }
    std::erase_if(out, [](const Atom& a) { return a.m == 0.0; });
    return out;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) : atoms_(normalize_atoms(std::move(atoms))) {
    for (const auto& a : atoms_) total_ += a.m;
}

DiscreteMeasure::DiscreteMeasure(const std::map<Point, double>& atoms) {
    std::vector<Atom> v;
    v.reserve(atoms.size());
    for (const auto& [z, m] : atoms) v.push_back({z, m});
    atoms_ = normalize_atoms(std::move(v));
    for (const auto& a : atoms_) total_ += a.m;
}

DiscreteMeasure DiscreteMeasure::dirac(const Point& z, double mass) {
    return DiscreteMeasure(std::vector<Atom>{{z, mass}});
}

DiscreteMeasure DiscreteMeasure::from_nodes(const Lattice& lattice, std::span<const double> values,
                                            double drop_tol) {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < values.size() && i < lattice.size(); ++i) {
        if (values[i] > drop_tol) atoms.push_back({lattice.node(i), values[i]});
    }
    return DiscreteMeasure(std::move(atoms));
}

bool DiscreteMeasure::is_probability(double tol) const { return std::abs(total_ - 1.0) <= tol; }

double DiscreteMeasure::mass(const Point& z) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), z,
                               [](const Atom& a, const Point& p) { return a.z < p; });
    return it != atoms_.end() && it->z == z ? it->m : 0.0;
}

std::vector<double> DiscreteMeasure::to_nodes(const Lattice& lattice) const {
    std::vector<double> v(lattice.size(), 0.0);
    for (const auto& a : atoms_) {
        const auto idx = lattice.index_of(a.z);
        if (!idx) throw Error(ErrorCode::UnsupportedAtom, "atom outside the lattice domain");
        v[*idx] += a.m;
    }
    return v;
}

bool DiscreteMeasure::supported_on(const Lattice& lattice) const {
    return std::all_of(atoms_.begin(), atoms_.end(), [&](const Atom& a) { return lattice.contains(a.z); });
}

DiscreteMeasure DiscreteMeasure::scaled(double factor) const {
    std::vector<Atom> v = atoms_;
    for (auto& a : v) a.m *= factor;
    return DiscreteMeasure(std::move(v));
}

DiscreteMeasure DiscreteMeasure::plus(const DiscreteMeasure& other) const {
    std::vector<Atom> v = atoms_;
    v.insert(v.end(), other.atoms_.begin(), other.atoms_.end());
    return DiscreteMeasure(std::move(v));
}

DiscreteMeasure DiscreteMeasure::transformed(const SignedPermutation& m) const {
    std::vector<Atom> v;
    v.reserve(atoms_.size());
    for (const auto& a : atoms_) v.push_back({m.apply(a.z), a.m});
    return DiscreteMeasure(std::move(v));
}

std::array<double, 3> DiscreteMeasure::barycenter(double h) const {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    if (total_ == 0.0) return c;
    for (const auto& a : atoms_) {
        for (int i = 0; i < 3; ++i) c[i] += a.m * a.z[i] * h;
    }
    for (double& v : c) v /= total_;
    return c;
}

double RadialProfile::total() const {
    double t = 0.0;
    for (double m : mass) t += m;
    return t;
}

double RadialProfile::distance(const RadialProfile& other) const {
    if (mass.size() != other.mass.size()) {
        throw Error(ErrorCode::InvalidArgument, "profiles over different shell decompositions");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) d = std::max(d, std::abs(mass[i] - other.mass[i]));
    return d;
}

RadialProfile modulus_pushforward(const DiscreteMeasure& mu, const Lattice& lattice) {
    RadialProfile p;
    for (const auto& s : lattice.shells()) p.radius.push_back(s.radius);
    p.mass.assign(p.radius.size(), 0.0);
    for (const auto& a : mu.atoms()) {
        const auto idx = lattice.index_of(a.z);
        if (!idx) throw Error(ErrorCode::UnsupportedAtom, "atom outside the lattice domain");
        p.mass[lattice.shell_of(*idx)] += a.m;
    }
    return p;
}

bool r_equivalent(const DiscreteMeasure& phi, const DiscreteMeasure& psi, const Lattice& lattice,
                  double tol) {
    return modulus_pushforward(phi, lattice).distance(modulus_pushforward(psi, lattice)) <= tol;
}

DiscreteMeasure symmetrize(const DiscreteMeasure& mu, const Lattice& lattice) {
    if (!mu.supported_on(lattice)) throw Error(ErrorCode::UnsupportedAtom, "atom outside the lattice domain");
    const auto group = point_group(lattice.dim());
    const double w = 1.0 / static_cast<double>(group.size());
    std::map<Point, double> acc;
    for (const auto& g : group) {
        for (const auto& a : mu.atoms()) acc[g.apply(a.z)] += w * a.m;
    }
    return DiscreteMeasure(acc);
}

bool is_point_group_invariant(const DiscreteMeasure& mu, int d, double tol) {
    for (const auto& g : point_group(d)) {
        for (const auto& a : mu.atoms()) {
            if (std::abs(mu.mass(g.apply(a.z)) - a.m) > tol) return false;
        }
    }
    return true;
}

DiscreteMeasure common_mass(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    std::vector<Atom> v;
    for (const auto& a : mu.atoms()) {
        const double m = std::min(a.m, nu.mass(a.z));
        if (m > 0.0) v.push_back({a.z, m});
    }
    return DiscreteMeasure(std::move(v));
}

double physical_distance(const Point& x, const Point& z, double h) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double d = static_cast<double>(x[i] - z[i]);
        s += d * d;
    }
    return std::sqrt(s) * h;
}

double power_moment(const DiscreteMeasure& mu, const Point& x, double alpha, double h) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    double v = 0.0;
    for (const auto& a : mu.atoms()) {
        const double r = physical_distance(x, a.z, h);
        if (r > 0.0) v += a.m * std::pow(r, alpha);
    }
    return v;
}

double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double h) {
    if (std::abs(mu.total() - nu.total()) > 1e-9) {
        throw Error(ErrorCode::MassMismatch, "transport between measures of different mass");
    }
    const auto& a = mu.atoms();
    const auto& b = nu.atoms();
    if (a.empty() || b.empty()) return 0.0;
    LinearProgram lp;
    for (std::size_t i = 0; i < a.size(); ++i) lp.add_row(RowSense::Equal, a[i].m);
    for (std::size_t j = 0; j < b.size(); ++j) lp.add_row(RowSense::Equal, b[j].m * mu.total() / nu.total());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const std::size_t v = lp.add_variable(physical_distance(a[i].z, b[j].z, h));
            lp.add_coefficient(i, v, 1.0);
            lp.add_coefficient(a.size() + j, v, 1.0);
        }
    }
    ExactOptions opt;
    opt.detect_alternative_optima = false;
    const LpSolution sol = solve_exact(lp, opt);
    if (sol.status != LpStatus::Optimal) {
        throw Error(ErrorCode::NumericalBreakdown, "transport LP did not reach optimality");
    }
    return sol.objective;
}

}  // namespace skembed
