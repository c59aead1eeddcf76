#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "skembed/lattice.hpp"
#include "skembed/lp.hpp"

namespace skembed {

/// Mean of f over nodes z with | |z - x| h - r | <= shell_tol. r = 0 returns f(x).
/// Throws BallEscapesDomain if some lattice point within r + shell_tol of x is not
/// a node, EmptyShell if no node lies on the shell.
double sphere_average(const Lattice& lattice, std::span<const double> f, std::size_t x, double r);

/// Distinct node distances r > 0 from x whose closed ball of radius r + shell_tol
/// lies in the node set (ascending).
std::vector<double> admissible_radii(const Lattice& lattice, std::size_t x);

struct EnvelopeResult {
    std::vector<double> values;
    std::size_t iterations = 0;
    double max_delta = 0.0;  // last sweep's largest change
    bool converged = false;
    bool monotone = true;    // every iterate <= its predecessor, checked exactly
};

/// Shell iteration f_n(x) = min(f_{n-1}(x), min_r sphere_average(f_{n-1}, x, r)).
/// Synchronous sweeps; stops when the largest change is <= tol. max_iter = 0 means 10 |nodes|.
/// Non-convergence is reported through `converged`, not thrown.
EnvelopeResult envelope_iterate(const Lattice& lattice, std::span<const double> f, std::size_t max_iter = 0,
                                double tol = 1e-10);

/// Largest g <= f with g(z) <= (P g)(z) at interior nodes. Runs the monotone map
/// g <- min(f, P g) from g = f, then finishes with policy iteration on the
/// stop/continue split (one sparse solve per policy) so the fixed point is exact.
/// Throws NotConverged if the fixed-point residual stays above tol.
EnvelopeResult envelope_onestep_oracle(const Lattice& lattice, std::span<const double> f, std::size_t max_iter = 0,
                                       double tol = 1e-10);

/// Optimal-stopping value of the reward R(z) = beta(z) - |x - z|^alpha (or beta alone when
/// zero_cost): for min, the smallest majorant J >= R with J >= P J; for max, the largest
/// minorant J <= R with J <= P J.
std::vector<double> value_function(const Lattice& lattice, std::span<const double> beta, std::size_t x,
                                   double alpha, ObjectiveSense sense, bool zero_cost = false);

/// Largest violation of g <= P g over interior nodes (<= 0 means subharmonic).
double subharmonic_violation(const Lattice& lattice, std::span<const double> g);

}  // namespace skembed
