#pragma once

#include <string>
#include <vector>

#include "skembed/lattice.hpp"
#include "skembed/lp.hpp"
#include "skembed/measures.hpp"

namespace skembed {

/// A self-contained embedding instance: domain, marginals, cost exponent, sense.
struct Instance {
    std::string name;
    LatticeParams lattice;
    DiscreteMeasure mu;
    DiscreteMeasure nu;
    double alpha = 1.0;
    ObjectiveSense sense = ObjectiveSense::Minimize;
};

/// Uniform measure on the exact-norm level set whose radius is closest to r
/// (ties go to the smaller radius). Only nodes are used.
DiscreteMeasure sphere_measure(const Lattice& lattice, double r);

/// Pushes mu through the Markov stop rule rho (linear replay per start) and returns the
/// stop law sum_x mu(x) s_x, cleaned of round-off atoms and renormalized to mu's mass.
DiscreteMeasure push_through_policy(const Lattice& lattice, const DiscreteMeasure& mu, const std::vector<double>& rho);

/// rho = 1 on nodes with |z| >= radius (and on the boundary), 0 elsewhere.
std::vector<double> exit_rule(const Lattice& lattice, double radius);

/// Targets below are built by replaying radial stop rules, so every preset pair is in
/// subharmonic order and point-group invariant. Exact-norm shells are used
/// (shell_tol = 1e-6 h) unless stated otherwise.

/// mu uniform on the level set nearest r1; nu = exit law of the ball of radius r2.
Instance preset_uniform_shell(int d, double h, double outer_radius, double r1, double r2, double alpha,
                              ObjectiveSense sense);

/// As uniform-shell, but the walk stops with probability p on the first layer reached
/// outside radius r2 and surely beyond r3, so nu charges two radial bands.
Instance preset_two_shell(int d, double h, double outer_radius, double r1, double r2, double r3, double p,
                          double alpha, ObjectiveSense sense);

/// d = 2, h = 0.5, R_O = 4: mu uniform on |z| = 2, nu the exit law of the ball of radius 3.
/// `annulus` selects the domain 1 <= |z| <= 4 instead of the ball.
Instance preset_annulus_pair(bool annulus);

/// mu = 1/2 C + 1/2 mu', nu = 1/2 C + 1/2 nu' where (mu', nu') is a uniform-shell pair and
/// C is delta_0 (center_radius = 0) or the level set nearest center_radius.
Instance preset_overlap_pair(int d, double h, double outer_radius, double center_radius, double r1, double r2,
                             double alpha);

}  // namespace skembed
