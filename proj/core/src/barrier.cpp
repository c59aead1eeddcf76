#include "skembed/barrier.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>

#include "skembed/error.hpp"

namespace skembed {

namespace {

constexpr double kParallel = 1.0 - 1e-12;

bool is_zero(const Point& z) { return z[0] == 0 && z[1] == 0 && z[2] == 0; }

double cell_angle(const Lattice& lattice, double radius, double angular_tol) {
    if (angular_tol >= 0.0) return angular_tol;
    return radius > 0.0 ? lattice.spacing() / radius : 0.0;
}

}  // namespace

const StartPolicy* BarrierPolicy::find(std::size_t start) const {
    for (const auto& s : starts) {
        if (s.start == start) return &s;
    }
    return nullptr;
}

Replay replay_policy(const Lattice& lattice, std::size_t start, const std::vector<double>& rho_in) {
    const std::size_t n = lattice.size();
    if (rho_in.size() != n) throw Error(ErrorCode::InvalidArgument, "policy size mismatch");
    std::vector<double> rho(rho_in);
    for (std::size_t z = 0; z < n; ++z) {
        if (!lattice.is_interior(z)) rho[z] = 1.0;
        if (!(rho[z] >= 0.0 && rho[z] <= 1.0)) throw Error(ErrorCode::InvalidArgument, "stop probability outside [0,1]");
    }
    const double p = 1.0 / (2.0 * lattice.dim());
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t z = 0; z < n; ++z) {
        trip.emplace_back(static_cast<int>(z), static_cast<int>(z), 1.0);
        for (std::size_t w : lattice.neighbors(z)) {
            if (lattice.is_interior(w) && rho[w] < 1.0) {
                trip.emplace_back(static_cast<int>(z), static_cast<int>(w), -p * (1.0 - rho[w]));
            }
        }
    }
    Eigen::SparseMatrix<double> a(static_cast<int>(n), static_cast<int>(n));
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "policy replay system is singular");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<int>(n));
    e[static_cast<int>(start)] = 1.0;
    const Eigen::VectorXd v = lu.solve(e);
    Replay r;
    r.arrivals.assign(v.data(), v.data() + n);
    r.occupation.resize(n);
    r.stop.resize(n);
    for (std::size_t z = 0; z < n; ++z) {
        r.stop[z] = rho[z] * r.arrivals[z];
        r.occupation[z] = (1.0 - rho[z]) * r.arrivals[z];
    }
    return r;
}

BarrierPolicy build_policy(const StoppingSolution& solution, const Lattice& lattice) {
    if (solution.method == SolveMethod::Exact && solution.status != LpStatus::Optimal) {
        throw Error(ErrorCode::NotOptimal, "policy extraction needs an optimal solution");
    }
    BarrierPolicy policy;
    for (const auto& s : solution.starts) {
        StartPolicy sp;
        sp.start = s.node;
        sp.mu = s.mu;
        sp.rho.assign(lattice.size(), 1.0);
        for (std::size_t z = 0; z < lattice.size(); ++z) {
            if (!lattice.is_interior(z)) continue;
            const double stop = std::max(0.0, s.stop[z]);
            const double cont = std::max(0.0, s.occupation[z]);
            if (stop + cont > 0.0) sp.rho[z] = stop / (stop + cont);
        }
        policy.starts.push_back(std::move(sp));
    }
    return policy;
}

double replay_error(const BarrierPolicy& policy, const StoppingSolution& solution, const Lattice& lattice) {
    double err = 0.0;
    for (const auto& sp : policy.starts) {
        const StartSolution* s = solution.find_start(sp.start);
        if (s == nullptr) throw Error(ErrorCode::PolicyGap, "policy start missing from solution");
        const Replay r = replay_policy(lattice, sp.start, sp.rho);
        for (std::size_t z = 0; z < lattice.size(); ++z) err = std::max(err, std::abs(r.stop[z] - s->stop[z]));
    }
    return err;
}

std::vector<Supports> extract_supports(const StoppingSolution& solution, const Lattice& lattice, double mass_tol) {
    if (solution.method == SolveMethod::Exact && solution.status != LpStatus::Optimal) {
        throw Error(ErrorCode::NotOptimal, "support extraction needs an optimal solution");
    }
    if (!(mass_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass tolerance must be positive");
    std::vector<Supports> out;
    for (const auto& s : solution.starts) {
        Supports sup;
        sup.start = s.node;
        for (std::size_t z = 0; z < lattice.size(); ++z) {
            if (s.stop[z] > mass_tol) sup.stop.push_back(z);
            if (lattice.is_interior(z) && s.occupation[z] > mass_tol) sup.pass.push_back(z);
        }
        out.push_back(std::move(sup));
    }
    return out;
}

bool cap_points_toward(CapRegime regime) {
    return regime == CapRegime::MinAlphaLt2 || regime == CapRegime::MaxAlphaGt2;
}

CapRegime regime_for(ObjectiveSense sense, double alpha) {
    if (alpha == 2.0) throw Error(ErrorCode::WrongRegime, "alpha = 2 has no barrier structure");
    const bool is_min = sense == ObjectiveSense::Minimize;
    if (alpha < 2.0) return is_min ? CapRegime::MinAlphaLt2 : CapRegime::MaxAlphaLt2;
    return is_min ? CapRegime::MinAlphaGt2 : CapRegime::MaxAlphaGt2;
}

const char* to_string(CapRegime regime) {
    switch (regime) {
        case CapRegime::MinAlphaLt2: return "min_alpha_lt2";
        case CapRegime::MaxAlphaGt2: return "max_alpha_gt2";
        case CapRegime::MinAlphaGt2: return "min_alpha_gt2";
        case CapRegime::MaxAlphaLt2: return "max_alpha_lt2";
    }
    return "unknown";
}

CapRegime parse_regime(const std::string& name) {
    for (CapRegime r : {CapRegime::MinAlphaLt2, CapRegime::MaxAlphaGt2, CapRegime::MinAlphaGt2, CapRegime::MaxAlphaLt2}) {
        if (name == to_string(r)) return r;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown regime '" + name + "'");
}

std::size_t CapReport::violations() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const CapRow& r) { return r.violation; }));
}

std::size_t CapReport::violations_for(std::size_t start) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](const CapRow& r) { return r.violation && r.start == start; }));
}

CapReport verify_cap_structure(const StoppingSolution& solution, const Lattice& lattice, CapRegime regime,
                               double angular_tol, double mass_tol) {
    CapReport rep;
    rep.regime = regime;
    rep.advisory = lattice.dim() == 2;
    rep.mass_tol = mass_tol;
    const bool toward = cap_points_toward(regime);
    for (const auto& sup : extract_supports(solution, lattice, mass_tol)) {
        const Point& x = lattice.node(sup.start);
        if (is_zero(x)) throw Error(ErrorCode::ZeroStart, "cap structure is undefined for a start at the origin");
        std::map<std::size_t, CapRow> rows;
        auto row_for = [&](std::size_t z) -> CapRow& {
            const std::size_t sh = lattice.shell_of(z);
            auto [it, fresh] = rows.try_emplace(sh);
            if (fresh) {
                it->second.start = sup.start;
                it->second.shell = sh;
                it->second.radius = lattice.shells()[sh].radius;
                it->second.angular_tol = cell_angle(lattice, it->second.radius, angular_tol);
                it->second.stop_min_cos = it->second.pass_min_cos = 2.0;
                it->second.stop_max_cos = it->second.pass_max_cos = -2.0;
            }
            return it->second;
        };
        auto visit = [&](std::size_t z, bool stop) {
            CapRow& row = row_for(z);
            const Point& pz = lattice.node(z);
            if (is_zero(pz)) {
                ++row.parallel_excluded;
                return;
            }
            const double c = cos_angle(x, pz);
            if (std::abs(c) > kParallel) {
                ++row.parallel_excluded;
                return;
            }
            if (stop) {
                row.stop_min_cos = std::min(row.stop_min_cos, c);
                row.stop_max_cos = std::max(row.stop_max_cos, c);
                ++row.stop_count;
            } else {
                row.pass_min_cos = std::min(row.pass_min_cos, c);
                row.pass_max_cos = std::max(row.pass_max_cos, c);
                ++row.pass_count;
            }
        };
        for (std::size_t z : sup.stop) visit(z, true);
        for (std::size_t z : sup.pass) visit(z, false);
        for (auto& [sh, row] : rows) {
            if (row.stop_count > 0 && row.pass_count > 0) {
                row.violation = toward ? row.pass_max_cos > row.stop_min_cos + row.angular_tol
                                       : row.pass_min_cos < row.stop_max_cos - row.angular_tol;
            }
            rep.rows.push_back(row);
        }
    }
    return rep;
}

std::vector<ForbiddenPair> forbidden_pairs(const StoppingSolution& solution, const Lattice& lattice, std::size_t x,
                                           CapRegime regime, double angular_tol, double mass_tol) {
    std::vector<ForbiddenPair> out;
    const bool toward = cap_points_toward(regime);
    for (const auto& sup : extract_supports(solution, lattice, mass_tol)) {
        if (sup.start != x) continue;
        const Point& px = lattice.node(x);
        if (is_zero(px)) throw Error(ErrorCode::ZeroStart, "cap structure is undefined for a start at the origin");
        auto usable = [&](std::size_t z, double& c) {
            const Point& pz = lattice.node(z);
            if (is_zero(pz)) return false;
            c = cos_angle(px, pz);
            return std::abs(c) <= kParallel;
        };
        for (std::size_t zp : sup.pass) {
            double cp = 0.0;
            if (!usable(zp, cp)) continue;
            for (std::size_t zs : sup.stop) {
                if (lattice.shell_of(zs) != lattice.shell_of(zp)) continue;
                double cs = 0.0;
                if (!usable(zs, cs)) continue;
                const double tol = cell_angle(lattice, lattice.shells()[lattice.shell_of(zp)].radius, angular_tol);
                const bool bad = toward ? cp > cs + tol : cp < cs - tol;
                if (bad) out.push_back({zp, zs, lattice.shell_of(zp), cp, cs});
            }
        }
    }
    return out;
}

std::vector<RandomizationProfile> randomization_profile(const BarrierPolicy& policy, const StoppingSolution& solution,
                                                        const Lattice& lattice, double mass_tol) {
    std::vector<RandomizationProfile> out;
    for (const auto& sp : policy.starts) {
        const StartSolution* s = solution.find_start(sp.start);
        if (s == nullptr) throw Error(ErrorCode::PolicyGap, "policy start missing from solution");
        RandomizationProfile prof;
        prof.start = sp.start;
        prof.per_shell.assign(lattice.shells().size(), 0.0);
        double total = 0.0;
        for (std::size_t z = 0; z < lattice.size(); ++z) {
            const double stop = s->stop[z];
            if (stop <= mass_tol) continue;
            total += stop;
            if (sp.rho[z] > 0.0 && sp.rho[z] < 1.0 - 1e-9) {
                prof.fraction += stop;
                prof.per_shell[lattice.shell_of(z)] += stop;
            }
        }
        if (total > 0.0) {
            prof.fraction /= total;
            for (double& v : prof.per_shell) v /= total;
        }
        out.push_back(std::move(prof));
    }
    return out;
}

double randomized_fraction(const std::vector<RandomizationProfile>& profiles, const BarrierPolicy& policy) {
    double num = 0.0, den = 0.0;
    for (const auto& p : profiles) {
        const StartPolicy* sp = policy.find(p.start);
        const double w = sp ? sp->mu : 0.0;
        num += w * p.fraction;
        den += w;
    }
    return den > 0.0 ? num / den : 0.0;
}

CommonMassCheck common_mass_check(const StoppingSolution& solution, const Lattice& lattice, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu, double tol) {
    if (solution.sense != ObjectiveSense::Minimize || solution.alpha > 1.0) {
        throw Error(ErrorCode::WrongRegime, "common mass stays put only for min problems with alpha <= 1");
    }
    CommonMassCheck c;
    c.worst_deficit = -std::numeric_limits<double>::infinity();
    const auto common = common_mass(mu, nu);
    for (const auto& a : common.atoms()) {
        const auto idx = lattice.index_of(a.z);
        if (!idx) throw Error(ErrorCode::SupportOffLattice, "common mass off the lattice");
        const StartSolution* s = solution.find_start(*idx);
        const double diag = s ? s->mu * s->stop[*idx] : 0.0;
        const double deficit = a.m - diag;
        if (deficit > c.worst_deficit) {
            c.worst_deficit = deficit;
            c.worst_node = *idx;
        }
    }
    if (common.empty()) c.worst_deficit = 0.0;
    c.pass = c.worst_deficit <= tol;
    return c;
}

}  // namespace skembed
