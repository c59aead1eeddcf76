#include "skembed/gain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <mutex>
#include <thread>

#include "skembed/embed.hpp"
#include "skembed/lp.hpp"

namespace skembed {

namespace {

template <class T>
T norm_d(const std::array<T, 3>& z, int d) {
    T s = 0;
    for (int i = 0; i < d; ++i) s += z[i] * z[i];
    return std::sqrt(s);
}

template <class T>
T h_generic(const std::array<T, 3>& z, T alpha, int d) {
    const T r = norm_d(z, d);
    return -alpha * std::pow(r, alpha - 2) * z[d - 1];
}

void check_dim(int d) {
    if (d != 2 && d != 3) throw Error(ErrorCode::InvalidDimension, "dimension must be 2 or 3");
}

void check_nonzero(const Vec3& z, int d) {
    check_dim(d);
    if (norm_d(z, d) == 0.0) throw Error(ErrorCode::ZeroVector, "h is undefined at the origin");
}

}  // namespace

double gain(const Point& x, const DiscreteMeasure& psi, double alpha, double h) {
    if (psi.empty()) throw Error(ErrorCode::EmptyMeasure, "gain of an empty measure");
    const auto bar = psi.barycenter(h);
    double dist2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double diff = x[i] * h - bar[i];
        dist2 += diff * diff;
    }
    const double base = dist2 > 0.0 ? std::pow(std::sqrt(dist2), alpha) : 0.0;
    return power_moment(psi, x, alpha, h) - base;
}

double h_field(const Vec3& z, double alpha, int d) {
    check_nonzero(z, d);
    return h_generic<double>(z, alpha, d);
}

double laplacian_h(const Vec3& z, double alpha, int d) {
    check_nonzero(z, d);
    const double r = norm_d(z, d);
    return -alpha * (alpha - 2.0) * (alpha + d - 2.0) * std::pow(r, alpha - 4.0) * z[d - 1];
}

double laplacian_h_fd(const Vec3& z, double alpha, int d, double step) {
    check_nonzero(z, d);
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
    using LD = long double;
    const std::array<LD, 3> zc{z[0], z[1], z[2]};
    const LD s = step;
    const LD center = h_generic<LD>(zc, alpha, d);
    LD sum = 0;
    for (int i = 0; i < d; ++i) {
        auto plus = zc;
        auto minus = zc;
        plus[i] += s;
        minus[i] -= s;
        sum += h_generic<LD>(plus, alpha, d) - 2 * center + h_generic<LD>(minus, alpha, d);
    }
    return static_cast<double>(sum / (s * s));
}

RadialProfile point_profile(const Lattice& lattice, double r) {
    RadialProfile p;
    for (const auto& s : lattice.shells()) {
        p.radius.push_back(s.radius);
        p.mass.push_back(0.0);
    }
    p.mass[lattice.nearest_shell(r)] = 1.0;
    return p;
}

namespace {

struct Bound {
    double value = 0.0;
    DiscreteMeasure sigma;
    double residual = 0.0;
};

Bound solve_bound(const Lattice& lattice, const Point& x, std::size_t y, const RadialProfile& profile, double alpha,
                  ObjectiveSense sense) {
    LinearProgram lp;
    lp.set_sense(sense);
    const OccupationBlock block = add_occupation_block(lp, lattice, y);
    const double h = lattice.spacing();
    for (std::size_t z = 0; z < lattice.size(); ++z) {
        lp.set_cost(block.s_col[z], transport_cost(x, lattice.node(z), alpha, h));
    }
    const auto& shells = lattice.shells();
    for (std::size_t k = 0; k < shells.size(); ++k) {
        const std::size_t row = lp.add_row(RowSense::Equal, profile.mass[k]);
        for (std::size_t z : shells[k].members) lp.add_coefficient(row, block.s_col[z], 1.0);
    }
    ExactOptions opt;
    opt.detect_alternative_optima = false;
    const LpSolution sol = solve_exact(lp, opt);
    if (sol.status == LpStatus::Infeasible) throw ProfileUnreachableError(sol.farkas);
    if (sol.status != LpStatus::Optimal) {
        throw Error(ErrorCode::NumericalBreakdown, std::string("gain LP ended with status ") + to_string(sol.status));
    }
    std::vector<double> stop(lattice.size());
    for (std::size_t z = 0; z < lattice.size(); ++z) stop[z] = sol.primal[block.s_col[z]];
    Bound b;
    b.sigma = DiscreteMeasure::from_nodes(lattice, stop);
    b.value = sol.objective - transport_cost(x, lattice.node(y), alpha, h);
    b.residual = check_optimality(lp, sol).primal_residual;
    return b;
}

}  // namespace

GainBounds gain_bounds(const Lattice& lattice, const Point& x, std::size_t y, const RadialProfile& profile,
                       double alpha) {
    if (x == Point{0, 0, 0}) throw Error(ErrorCode::ZeroVector, "x must be nonzero");
    if (y >= lattice.size() || !lattice.is_interior(y)) {
        throw Error(ErrorCode::InvalidArgument, "start must be an interior node");
    }
    if (profile.mass.size() != lattice.shells().size()) {
        throw Error(ErrorCode::InvalidArgument, "profile does not match the lattice shells");
    }
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    const Bound lo = solve_bound(lattice, x, y, profile, alpha, ObjectiveSense::Minimize);
    const Bound hi = solve_bound(lattice, x, y, profile, alpha, ObjectiveSense::Maximize);
    GainBounds g;
    g.lower = lo.value;
    g.upper = hi.value;
    g.sigma_lower = lo.sigma;
    g.sigma_upper = hi.sigma;
    g.residual = std::max(lo.residual, hi.residual);
    return g;
}

const char* to_string(ScanVerdict v) {
    switch (v) {
        case ScanVerdict::Pass: return "PASS";
        case ScanVerdict::Fail: return "FAIL";
        case ScanVerdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

namespace {

long sq(const Point& p) {
    return static_cast<long>(p[0]) * p[0] + static_cast<long>(p[1]) * p[1] + static_cast<long>(p[2]) * p[2];
}

// Lattice points on the exact level set nearest r (physical), one per orbit of the stabilizer of y.
std::vector<Point> scan_points(int d, double h, double r, const Point& y) {
    // Nearest attained squared norm (ties go down).
    const int b = static_cast<int>(std::ceil(r / h)) + 2;
    const int bz = d == 3 ? b : 0;
    long best = -1;
    double gap = std::numeric_limits<double>::infinity();
    std::vector<Point> all;
    for (int i = -b; i <= b; ++i) {
        for (int j = -b; j <= b; ++j) {
            for (int k = -bz; k <= bz; ++k) {
                const Point p{i, j, k};
                const long n2 = sq(p);
                if (n2 == 0) continue;
                const double g = std::abs(std::sqrt(static_cast<double>(n2)) * h - r);
                if (g < gap - 1e-12 || (std::abs(g - gap) <= 1e-12 && n2 < best)) {
                    gap = g;
                    best = n2;
                }
                all.push_back(p);
            }
        }
    }
    std::vector<SignedPermutation> stab;
    for (const auto& g : point_group(d)) {
        if (g.apply(y) == y) stab.push_back(g);
    }
    std::set<Point> reps;
    for (const auto& p : all) {
        if (sq(p) != best) continue;
        Point rep = p;
        for (const auto& g : stab) rep = std::min(rep, g.apply(p));
        reps.insert(rep);
    }
    return {reps.begin(), reps.end()};
}

}  // namespace

ScanResult monotonicity_scan(const Lattice& lattice, double r_x, std::size_t y, const RadialProfile& profile,
                             double alpha, unsigned threads) {
    const double h = lattice.spacing();
    const Point& py = lattice.node(y);
    const auto points = scan_points(lattice.dim(), h, r_x, py);
    ScanResult res;
    res.rows.resize(points.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                const GainBounds g = gain_bounds(lattice, points[i], y, profile, alpha);
                ScanRow& row = res.rows[i];
                row.x = points[i];
                row.dist_xy = physical_distance(points[i], py, h);
                row.cos_angle = py == Point{0, 0, 0} ? 0.0 : cos_angle(points[i], py);
                row.lower = g.lower;
                row.upper = g.upper;
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::sort(res.rows.begin(), res.rows.end(), [](const ScanRow& a, const ScanRow& b) {
        if (a.dist_xy != b.dist_xy) return a.dist_xy < b.dist_xy;
        return a.x < b.x;
    });

    const double tol = res.tol;
    if (std::abs(alpha - 2.0) <= 1e-12) {
        res.expectation = "constant";
        double lo_min = 0, lo_max = 0, hi_min = 0, hi_max = 0;
        for (std::size_t i = 0; i < res.rows.size(); ++i) {
            const auto& r = res.rows[i];
            if (i == 0) {
                lo_min = lo_max = r.lower;
                hi_min = hi_max = r.upper;
            }
            lo_min = std::min(lo_min, r.lower);
            lo_max = std::max(lo_max, r.lower);
            hi_min = std::min(hi_min, r.upper);
            hi_max = std::max(hi_max, r.upper);
        }
        res.verdict = (lo_max - lo_min <= tol && hi_max - hi_min <= tol) ? ScanVerdict::Pass : ScanVerdict::Fail;
        return res;
    }

    // Group rows by distance; compare consecutive groups through their extremes.
    const double sign = alpha < 2.0 ? -1.0 : 1.0;
    res.expectation = alpha < 2.0 ? "decreasing" : "increasing";
    struct Group {
        double lo_min, lo_max, hi_min, hi_max;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto& r = res.rows[i];
        if (i == 0 || r.dist_xy - res.rows[i - 1].dist_xy > 1e-9) {
            groups.push_back({r.lower, r.lower, r.upper, r.upper});
        } else {
            auto& g = groups.back();
            g.lo_min = std::min(g.lo_min, r.lower);
            g.lo_max = std::max(g.lo_max, r.lower);
            g.hi_min = std::min(g.hi_min, r.upper);
            g.hi_max = std::max(g.hi_max, r.upper);
        }
    }
    if (groups.size() < 2) {
        res.verdict = ScanVerdict::Inconclusive;
        return res;
    }
    bool wrong = false;
    bool flat = false;
    for (std::size_t k = 1; k < groups.size(); ++k) {
        const Group& a = groups[k - 1];
        const Group& b = groups[k];
        // Worst-case step in the expected direction for each column.
        const double step_lo = sign > 0 ? b.lo_min - a.lo_max : a.lo_min - b.lo_max;
        const double step_hi = sign > 0 ? b.hi_min - a.hi_max : a.hi_min - b.hi_max;
        for (double s : {step_lo, step_hi}) {
            if (s < -tol) wrong = true;
            else if (s <= tol) flat = true;
        }
    }
    res.verdict = wrong ? ScanVerdict::Fail : flat ? ScanVerdict::Inconclusive : ScanVerdict::Pass;
    return res;
}

}  // namespace skembed
