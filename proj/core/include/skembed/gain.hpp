#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "skembed/error.hpp"
#include "skembed/lattice.hpp"
#include "skembed/measures.hpp"

namespace skembed {

using Vec3 = std::array<double, 3>;

/// G(x, psi) = int |x - z|^alpha dpsi(z) - |x - y|^alpha with y the barycenter of psi.
/// Physical units; x is a lattice point (need not be a node). Throws EmptyMeasure.
double gain(const Point& x, const DiscreteMeasure& psi, double alpha, double h);

/// h(z) = -alpha |z|^(alpha-2) z_d, the e_d-derivative of the cost at x = 0.
/// z_d is component d-1. Throws ZeroVector.
double h_field(const Vec3& z, double alpha, int d);

/// Closed form of Delta h: -alpha (alpha-2) (alpha+d-2) |z|^(alpha-4) z_d.
double laplacian_h(const Vec3& z, double alpha, int d);

/// Second-order central differences of h_field in long double.
double laplacian_h_fd(const Vec3& z, double alpha, int d, double step);

/// All mass on the shell whose representative radius is nearest r.
RadialProfile point_profile(const Lattice& lattice, double r);

struct GainBounds {
    double lower = 0.0;
    double upper = 0.0;
    DiscreteMeasure sigma_lower;
    DiscreteMeasure sigma_upper;
    double residual = 0.0;  // worst LP primal residual of the two solves
};

/// Extremes of G(x, sigma) over stop laws sigma of the walk from y whose shell
/// masses equal `profile` (indexed like lattice.shells()). Throws ZeroVector for
/// x = 0, InvalidArgument if y is not interior or the profile is malformed, and
/// ProfileUnreachable (with the Farkas ray) if no such sigma exists.
GainBounds gain_bounds(const Lattice& lattice, const Point& x, std::size_t y, const RadialProfile& profile,
                       double alpha);

class ProfileUnreachableError : public Error {
public:
    explicit ProfileUnreachableError(std::vector<double> farkas)
        : Error(ErrorCode::ProfileUnreachable, "no stop law from the start has the requested profile"),
          farkas_(std::move(farkas)) {}
    const std::vector<double>& farkas() const noexcept { return farkas_; }

private:
    std::vector<double> farkas_;
};

enum class ScanVerdict { Pass, Fail, Inconclusive };
const char* to_string(ScanVerdict v);

struct ScanRow {
    Point x{};
    double cos_angle = 0.0;  // between x and y
    double dist_xy = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct ScanResult {
    std::vector<ScanRow> rows;  // ascending dist_xy, then lexicographic x
    ScanVerdict verdict = ScanVerdict::Inconclusive;
    std::string expectation;    // "decreasing", "increasing" or "constant"
    double tol = 1e-9;
};

/// Scans lattice points x on the exact-norm level set nearest r_x, one per orbit of the
/// stabilizer of y. For 0 < alpha < 2 both columns must fall strictly (by more than tol)
/// between consecutive distances, for alpha > 2 rise strictly, for alpha = 2 stay within tol.
/// Steps inside tol give Inconclusive, never Pass. `threads` > 1 solves points concurrently.
ScanResult monotonicity_scan(const Lattice& lattice, double r_x, std::size_t y, const RadialProfile& profile,
                             double alpha, unsigned threads = 1);

}  // namespace skembed
