#include "skembed/envelope.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>

#include "skembed/embed.hpp"
#include "skembed/error.hpp"

namespace skembed {

namespace {

double neighbor_mean(const Lattice& lattice, std::span<const double> g, std::size_t z) {
    double s = 0.0;
    for (std::size_t w : lattice.neighbors(z)) s += g[w];
    return s / static_cast<double>(lattice.neighbors(z).size());
}

// Offsets (squared lattice length k) grouped by k, up to k <= kmax.
std::map<long, std::vector<Point>> offsets_by_norm(int d, long kmax) {
    std::map<long, std::vector<Point>> out;
    const int b = static_cast<int>(std::floor(std::sqrt(static_cast<double>(kmax)))) + 1;
    const int bz = d == 3 ? b : 0;
    for (int i = -b; i <= b; ++i) {
        for (int j = -b; j <= b; ++j) {
            for (int k = -bz; k <= bz; ++k) {
                const long n2 = static_cast<long>(i) * i + static_cast<long>(j) * j + static_cast<long>(k) * k;
                if (n2 <= kmax) out[n2].push_back({i, j, k});
            }
        }
    }
    return out;
}

Point add(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

bool ball_inside(const Lattice& lattice, const Point& x, double radius) {
    const double h = lattice.spacing();
    const long kmax = static_cast<long>(std::floor((radius / h) * (radius / h) + 1e-9));
    for (const auto& [k, offs] : offsets_by_norm(lattice.dim(), kmax)) {
        for (const auto& o : offs) {
            if (!lattice.contains(add(x, o))) return false;
        }
    }
    return true;
}

// Nodes on the shell of radius r around x (ball containment already checked).
std::vector<std::size_t> shell_nodes(const Lattice& lattice, const Point& x, double r) {
    const double h = lattice.spacing();
    const double tol = lattice.shell_tol();
    const double outer = (r + tol) / h;
    const long kmax = static_cast<long>(std::floor(outer * outer + 1e-9));
    std::vector<std::size_t> nodes;
    for (const auto& [k, offs] : offsets_by_norm(lattice.dim(), kmax)) {
        const double dist = std::sqrt(static_cast<double>(k)) * h;
        if (std::abs(dist - r) > tol + 1e-12 * std::max(1.0, r)) continue;
        for (const auto& o : offs) {
            if (auto idx = lattice.index_of(add(x, o))) nodes.push_back(*idx);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

}  // namespace

double sphere_average(const Lattice& lattice, std::span<const double> f, std::size_t x, double r) {
    if (r < 0.0) throw Error(ErrorCode::InvalidArgument, "negative radius");
    if (r == 0.0) return f[x];
    const Point& px = lattice.node(x);
    if (!ball_inside(lattice, px, r + lattice.shell_tol())) {
        throw Error(ErrorCode::BallEscapesDomain, "sphere average ball leaves the domain");
    }
    const auto nodes = shell_nodes(lattice, px, r);
    if (nodes.empty()) throw Error(ErrorCode::EmptyShell, "no node on the requested shell");
    double s = 0.0;
    for (std::size_t z : nodes) s += f[z];
    return s / static_cast<double>(nodes.size());
}

std::vector<double> admissible_radii(const Lattice& lattice, std::size_t x) {
    const double h = lattice.spacing();
    const double tol = lattice.shell_tol();
    const Point& px = lattice.node(x);
    std::vector<double> radii;
    const double rmax = lattice.outer_radius();
    const long kmax = static_cast<long>(std::floor((rmax / h) * (rmax / h) + 1e-9));
    for (const auto& [k, offs] : offsets_by_norm(lattice.dim(), kmax)) {
        if (k == 0) continue;
        const double r = std::sqrt(static_cast<double>(k)) * h;
        // Balls are nested, so the first failure ends the list.
        if (!ball_inside(lattice, px, r + tol)) break;
        radii.push_back(r);
    }
    return radii;
}

EnvelopeResult envelope_iterate(const Lattice& lattice, std::span<const double> f, std::size_t max_iter,
                                double tol) {
    const std::size_t n = lattice.size();
    if (f.size() != n) throw Error(ErrorCode::InvalidArgument, "grid function size mismatch");
    for (double v : f) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "grid function must be finite");
    }
    if (max_iter == 0) max_iter = 10 * n;

    // Shell membership per node and admissible radius, computed once.
    std::vector<std::vector<std::vector<std::size_t>>> shells(n);
    for (std::size_t x = 0; x < n; ++x) {
        for (double r : admissible_radii(lattice, x)) {
            auto nodes = shell_nodes(lattice, lattice.node(x), r);
            if (!nodes.empty()) shells[x].push_back(std::move(nodes));
        }
    }

    EnvelopeResult res;
    res.values.assign(f.begin(), f.end());
    std::vector<double> next(n);
    for (std::size_t it = 0; it < max_iter; ++it) {
        double delta = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            double best = res.values[x];
            for (const auto& shell : shells[x]) {
                double s = 0.0;
                for (std::size_t z : shell) s += res.values[z];
                best = std::min(best, s / static_cast<double>(shell.size()));
            }
            next[x] = best;
            if (next[x] > res.values[x]) res.monotone = false;
            delta = std::max(delta, std::abs(next[x] - res.values[x]));
        }
        res.values.swap(next);
        res.iterations = it + 1;
        res.max_delta = delta;
        if (delta <= tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

namespace {

// Value of the policy "continue on `cont`, stop elsewhere": g = f off cont, g = P g on cont.
std::vector<double> evaluate_policy(const Lattice& lattice, std::span<const double> f, const std::vector<bool>& cont) {
    const std::size_t n = lattice.size();
    std::vector<int> idx(n, -1);
    int m = 0;
    for (std::size_t z = 0; z < n; ++z) {
        if (cont[z]) idx[z] = m++;
    }
    std::vector<double> g(f.begin(), f.end());
    if (m == 0) return g;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (std::size_t z = 0; z < n; ++z) {
        if (!cont[z]) continue;
        const double p = 1.0 / static_cast<double>(lattice.neighbors(z).size());
        trip.emplace_back(idx[z], idx[z], 1.0);
        for (std::size_t w : lattice.neighbors(z)) {
            if (cont[w]) trip.emplace_back(idx[z], idx[w], -p);
            else rhs[idx[z]] += p * f[w];
        }
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "policy evaluation failed");
    const Eigen::VectorXd sol = lu.solve(rhs);
    for (std::size_t z = 0; z < n; ++z) {
        if (cont[z]) g[z] = sol[idx[z]];
    }
    return g;
}

}  // namespace

double subharmonic_violation(const Lattice& lattice, std::span<const double> g) {
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < lattice.size(); ++z) {
        if (lattice.is_interior(z)) v = std::max(v, g[z] - neighbor_mean(lattice, g, z));
    }
    return v;
}

EnvelopeResult envelope_onestep_oracle(const Lattice& lattice, std::span<const double> f, std::size_t max_iter,
                                       double tol) {
    const std::size_t n = lattice.size();
    if (f.size() != n) throw Error(ErrorCode::InvalidArgument, "grid function size mismatch");
    for (double v : f) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "grid function must be finite");
    }
    if (max_iter == 0) max_iter = 10 * n;
    double scale = 1.0;
    for (double v : f) scale = std::max(scale, std::abs(v));

    EnvelopeResult res;
    res.values.assign(f.begin(), f.end());
    std::vector<double> next(n);
    // Jacobi sweeps of the monotone map; a modest number suffices to seed the policy.
    const std::size_t sweeps = std::min<std::size_t>(max_iter, 200);
    for (std::size_t it = 0; it < sweeps; ++it) {
        double delta = 0.0;
        for (std::size_t z = 0; z < n; ++z) {
            next[z] = lattice.is_interior(z) ? std::min(f[z], neighbor_mean(lattice, res.values, z)) : f[z];
            if (next[z] > res.values[z]) res.monotone = false;
            delta = std::max(delta, res.values[z] - next[z]);
        }
        res.values.swap(next);
        res.iterations = it + 1;
        res.max_delta = delta;
        if (delta <= tol) break;
    }

    // Policy iteration: continue where P g < f, evaluate, repeat until the split is stable.
    std::vector<bool> cont(n, false);
    for (std::size_t z = 0; z < n; ++z) cont[z] = lattice.is_interior(z) && res.values[z] < f[z] - 1e-13 * scale;
    for (std::size_t round = 0; round < 10 * n + 10; ++round) {
        const auto g = evaluate_policy(lattice, f, cont);
        bool changed = false;
        for (std::size_t z = 0; z < n; ++z) {
            if (!lattice.is_interior(z)) continue;
            const double pg = neighbor_mean(lattice, g, z);
            bool c = cont[z];
            if (!c && pg < f[z] - 1e-13 * scale) c = true;
            if (c && pg > f[z] + 1e-13 * scale) c = false;
            if (c != cont[z]) {
                cont[z] = c;
                changed = true;
            }
        }
        res.values = g;
        ++res.iterations;
        if (!changed) break;
    }

    double resid = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
        const double target = lattice.is_interior(z) ? std::min(f[z], neighbor_mean(lattice, res.values, z)) : f[z];
        resid = std::max(resid, std::abs(res.values[z] - target));
    }
    res.max_delta = resid;
    res.converged = resid <= std::max(tol, 1e-12 * scale);
    if (!res.converged) {
        throw Error(ErrorCode::NotConverged, "one-step envelope residual " + std::to_string(resid));
    }
    return res;
}

std::vector<double> value_function(const Lattice& lattice, std::span<const double> beta, std::size_t x,
                                   double alpha, ObjectiveSense sense, bool zero_cost) {
    const std::size_t n = lattice.size();
    if (beta.size() != n) throw Error(ErrorCode::InvalidArgument, "grid function size mismatch");
    std::vector<double> reward(n);
    const Point& px = lattice.node(x);
    for (std::size_t z = 0; z < n; ++z) {
        reward[z] = beta[z] - (zero_cost ? 0.0 : transport_cost(px, lattice.node(z), alpha, lattice.spacing()));
    }
    if (sense == ObjectiveSense::Maximize) return envelope_onestep_oracle(lattice, reward).values;
    for (double& v : reward) v = -v;
    auto g = envelope_onestep_oracle(lattice, reward).values;
    for (double& v : g) v = -v;
    return g;
}

}  // namespace skembed
