#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "skembed/embed.hpp"
#include "skembed/lattice.hpp"
#include "skembed/measures.hpp"

namespace skembed {

/// Markov stop rule per start: stop with probability rho(z) on arrival at z.
/// Boundary nodes always stop.
struct StartPolicy {
    std::size_t start = 0;
    double mu = 0.0;
    std::vector<double> rho;
};

struct BarrierPolicy {
    std::vector<StartPolicy> starts;
    const StartPolicy* find(std::size_t start) const;
};

/// Arrivals V, continue visits m = (1 - rho) V and stops s = rho V of the walk started
/// at `start` under rho, from the linear system V = delta_start + P^T((1 - rho) V).
struct Replay {
    std::vector<double> arrivals;
    std::vector<double> occupation;
    std::vector<double> stop;
};

Replay replay_policy(const Lattice& lattice, std::size_t start, const std::vector<double>& rho);

/// rho = s / (s + m), with rho = 1 where s + m = 0 and on the boundary.
/// Throws NotOptimal for non-optimal solutions.
BarrierPolicy build_policy(const StoppingSolution& solution, const Lattice& lattice);

/// Largest |s_replay - s_x| over starts and nodes.
double replay_error(const BarrierPolicy& policy, const StoppingSolution& solution, const Lattice& lattice);

struct Supports {
    std::size_t start = 0;
    std::vector<std::size_t> stop;  // s_x(z) > mass_tol
    std::vector<std::size_t> pass;  // interior z with m_x(z) > mass_tol
};

std::vector<Supports> extract_supports(const StoppingSolution& solution, const Lattice& lattice,
                                       double mass_tol = 1e-9);

enum class CapRegime { MinAlphaLt2, MaxAlphaGt2, MinAlphaGt2, MaxAlphaLt2 };

/// Regimes whose optimal cap points toward the start (stop where <x, z> is large).
bool cap_points_toward(CapRegime regime);
/// Regime predicted for (sense, alpha); alpha = 2 has no barrier and throws WrongRegime.
CapRegime regime_for(ObjectiveSense sense, double alpha);
const char* to_string(CapRegime regime);
CapRegime parse_regime(const std::string& name);

struct CapRow {
    std::size_t start = 0;
    std::size_t shell = 0;
    double radius = 0.0;
    double stop_min_cos = 0.0;
    double stop_max_cos = 0.0;
    double pass_min_cos = 0.0;
    double pass_max_cos = 0.0;
    std::size_t stop_count = 0;
    std::size_t pass_count = 0;
    double angular_tol = 0.0;
    bool violation = false;
    std::size_t parallel_excluded = 0;
};

struct CapReport {
    CapRegime regime = CapRegime::MinAlphaLt2;
    bool advisory = false;  // d = 2
    double mass_tol = 1e-9;
    std::vector<CapRow> rows;
    std::size_t violations() const;
    std::size_t violations_for(std::size_t start) const;
};

/// angular_tol < 0 selects the per-shell one-cell angle h / r. Nodes parallel to the
/// start (|cos| > 1 - 1e-12) are excluded from both supports and counted.
/// Throws ZeroStart if a start is the origin.
CapReport verify_cap_structure(const StoppingSolution& solution, const Lattice& lattice, CapRegime regime,
                               double angular_tol = -1.0, double mass_tol = 1e-9);

struct ForbiddenPair {
    std::size_t pass = 0;
    std::size_t stop = 0;
    std::size_t shell = 0;
    double pass_cos = 0.0;
    double stop_cos = 0.0;
};

/// Same-shell (pass, stop) pairs on the wrong side of the cap for start x.
std::vector<ForbiddenPair> forbidden_pairs(const StoppingSolution& solution, const Lattice& lattice,
                                           std::size_t x, CapRegime regime, double angular_tol = -1.0,
                                           double mass_tol = 1e-9);

struct RandomizationProfile {
    std::size_t start = 0;
    double fraction = 0.0;  // stop mass at nodes with 0 < rho < 1 - 1e-9
    std::vector<double> per_shell;
};

std::vector<RandomizationProfile> randomization_profile(const BarrierPolicy& policy, const StoppingSolution& solution,
                                                        const Lattice& lattice, double mass_tol = 1e-9);
/// mu-weighted average of the per-start fractions.
double randomized_fraction(const std::vector<RandomizationProfile>& profiles, const BarrierPolicy& policy);

struct CommonMassCheck {
    bool pass = false;
    double worst_deficit = 0.0;  // max over z of (mu ^ nu)(z) - pi(z, z)
    std::size_t worst_node = 0;
};

/// Throws WrongRegime unless the solution is a min problem with alpha <= 1.
CommonMassCheck common_mass_check(const StoppingSolution& solution, const Lattice& lattice, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu, double tol = 1e-8);

}  // namespace skembed
