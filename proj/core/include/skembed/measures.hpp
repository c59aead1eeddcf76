#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "skembed/lattice.hpp"

namespace skembed {

struct Atom {
    Point z{};
    double m = 0.0;
};

/// Nonnegative sparse measure on lattice points. Atoms are kept sorted
/// lexicographically; zero atoms are dropped.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(std::vector<Atom> atoms);
    explicit DiscreteMeasure(const std::map<Point, double>& atoms);

    static DiscreteMeasure dirac(const Point& z, double mass = 1.0);
    /// Dense node vector over `lattice` to sparse measure (entries <= drop_tol dropped).
    static DiscreteMeasure from_nodes(const Lattice& lattice, std::span<const double> values,
                                      double drop_tol = 0.0);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t support_size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }
    double total() const noexcept { return total_; }
    bool is_probability(double tol = 1e-12) const;
    double mass(const Point& z) const;

    /// Dense node vector; throws UnsupportedAtom if an atom is off-lattice.
    std::vector<double> to_nodes(const Lattice& lattice) const;
    bool supported_on(const Lattice& lattice) const;

    DiscreteMeasure scaled(double factor) const;
    DiscreteMeasure plus(const DiscreteMeasure& other) const;
    DiscreteMeasure transformed(const SignedPermutation& m) const;
    /// Physical barycenter (coordinates times h).
    std::array<double, 3> barycenter(double h) const;

private:
    std::vector<Atom> atoms_;
    double total_ = 0.0;
};

/// Real value per node of a lattice.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(std::size_t n, double fill = 0.0) : values_(n, fill) {}
    explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& data() noexcept { return values_; }
    const std::vector<double>& data() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

/// Mass per shell (indexed like Lattice::shells()).
struct RadialProfile {
    std::vector<double> radius;
    std::vector<double> mass;

    double total() const;
    /// Maximum shell-wise absolute difference.
    double distance(const RadialProfile& other) const;
};

RadialProfile modulus_pushforward(const DiscreteMeasure& mu, const Lattice& lattice);
bool r_equivalent(const DiscreteMeasure& phi, const DiscreteMeasure& psi, const Lattice& lattice,
                  double tol);
/// Average of M mu over the lattice point group.
DiscreteMeasure symmetrize(const DiscreteMeasure& mu, const Lattice& lattice);
bool is_point_group_invariant(const DiscreteMeasure& mu, int d, double tol = 1e-12);
/// Atom-wise minimum.
DiscreteMeasure common_mass(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
/// sum_z mu(z) |x h - z h|^alpha in physical units.
double power_moment(const DiscreteMeasure& mu, const Point& x, double alpha, double h);
/// Exact 1-Wasserstein distance (physical units) by a transport LP over the support product.
double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double h);

/// Physical distance |x - z| h.
double physical_distance(const Point& x, const Point& z, double h);

}  // namespace skembed
