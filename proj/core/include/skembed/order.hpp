#pragma once

#include <optional>
#include <vector>

#include "skembed/lattice.hpp"
#include "skembed/measures.hpp"

namespace skembed {

enum class OrderRoute { Lp, Potential };

/// Verdict on mu <_s nu over the killed walk. A witness f is subharmonic at every
/// interior node and has sum f dmu > sum f dnu.
struct OrderVerdict {
    bool in_order = false;
    OrderRoute route = OrderRoute::Lp;
    std::vector<double> witness;     // empty when in order
    std::vector<double> aggregate;   // M = (I - P^T)^{-1}(mu - nu) on interior nodes (potential route)
    double min_aggregate = 0.0;
    double boundary_residual = 0.0;  // largest |mu(b) - nu(b) + sum_w P(w,b) M(w)|
    double witness_violation = 0.0;  // sum f dmu - sum f dnu
    double witness_subharmonic_residual = 0.0;  // max over interior of f - P f
};

/// Route through embedding feasibility. The witness is the largest subharmonic
/// minorant of -beta, beta being the marginal multipliers of the Farkas ray.
OrderVerdict check_order_lp(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Route through the aggregate occupation M. In order iff M >= -1e-10 and the
/// boundary inflow matches nu - mu on the boundary within 1e-9. Witnesses are
/// -G(., z0) at a negative M(z0), or +-h_b (exit probability at b) for a boundary mismatch.
OrderVerdict check_order_potential(const Lattice& lattice, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct WitnessCheck {
    double subharmonic_residual = 0.0;
    double violation = 0.0;
    bool valid = false;
};

/// Independent re-check of a witness: max(f - P f) <= 1e-9 and violation > 1e-10.
WitnessCheck check_witness(const Lattice& lattice, const std::vector<double>& f, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu);

}  // namespace skembed
