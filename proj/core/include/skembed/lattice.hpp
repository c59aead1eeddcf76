#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace skembed {

/// Integer lattice coordinates. Unused trailing components are zero (d = 2 uses [0], [1]).
using Point = std::array<int, 3>;

struct PointHash {
    std::size_t operator()(const Point& p) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (int c : p) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c));
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Construction parameters of a lattice domain. `inner_radius > 0` carves out a
/// hole and yields an annulus (origin is then not a node).
struct LatticeParams {
    int d = 2;
    double h = 1.0;
    double outer_radius = 1.0;
    double shell_tol = -1.0;  // negative: default h/2
    double inner_radius = 0.0;
};

/// Nodes whose physical norm lies within `shell_tol` of `radius`.
struct Shell {
    double radius = 0.0;
    std::vector<std::size_t> members;
};

/// Signed coordinate permutation: (Mz)_i = sign[i] * z[perm[i]].
struct SignedPermutation {
    std::array<int, 3> perm{0, 1, 2};
    std::array<int, 3> sign{1, 1, 1};

    Point apply(const Point& z) const {
        return {sign[0] * z[perm[0]], sign[1] * z[perm[1]], sign[2] * z[perm[2]]};
    }
    /// this ∘ other
    SignedPermutation compose(const SignedPermutation& other) const;
    SignedPermutation inverse() const;
    bool operator==(const SignedPermutation&) const = default;
};

/// All signed coordinate permutations in dimension d (order 2^d d!).
std::vector<SignedPermutation> point_group(int d);

/// Discretized domain: lattice points z with r_in <= |z h| <= R_O, nearest-neighbor
/// structure and shell decomposition. Immutable after construction.
class Lattice {
public:
    static Lattice build(const LatticeParams& params);

    const LatticeParams& params() const noexcept { return params_; }
    int dim() const noexcept { return params_.d; }
    double spacing() const noexcept { return params_.h; }
    double outer_radius() const noexcept { return params_.outer_radius; }
    double shell_tol() const noexcept { return params_.shell_tol; }

    std::size_t size() const noexcept { return nodes_.size(); }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    std::optional<std::size_t> index_of(const Point& z) const;
    bool contains(const Point& z) const { return index_.count(z) != 0; }

    bool is_interior(std::size_t i) const { return interior_[i]; }
    bool is_boundary(std::size_t i) const { return !interior_[i]; }
    std::size_t interior_count() const noexcept { return interior_count_; }

    /// Neighbor indices inside the node set (exactly 2d for interior nodes).
    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    /// Physical Euclidean norm |z h|.
    double norm(std::size_t i) const { return norms_[i]; }
    double physical_norm(const Point& z) const;

    const std::vector<Shell>& shells() const noexcept { return shells_; }
    std::size_t shell_of(std::size_t i) const { return shell_index_[i]; }
    /// Shell whose representative radius is closest to r.
    std::size_t nearest_shell(double r) const;

    /// Point-group image of node i (the node set is invariant).
    std::size_t image(const SignedPermutation& m, std::size_t i) const;

private:
    LatticeParams params_;
    std::vector<Point> nodes_;
    std::unordered_map<Point, std::size_t, PointHash> index_;
    std::vector<bool> interior_;
    std::size_t interior_count_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> adjacency_;
    std::vector<double> norms_;
    std::vector<Shell> shells_;
    std::vector<std::size_t> shell_index_;
};

Lattice build_lattice(int d, double h, double outer_radius, double shell_tol = -1.0);

/// Simple symmetric nearest-neighbor walk: 1/(2d) to each neighbor from interior
/// nodes, boundary nodes absorbing.
class WalkKernel {
public:
    explicit WalkKernel(const Lattice& lattice);

    const Lattice& lattice() const noexcept { return *lattice_; }
    double step_probability() const noexcept { return p_; }

    /// P(from, to)
    double transition(std::size_t from, std::size_t to) const;
    /// (Pf)(z) = sum_w P(z,w) f(w); zero on boundary rows.
    std::vector<double> apply(std::span<const double> f) const;
    /// (P^T m)(z) = sum_w P(w,z) m(w).
    std::vector<double> apply_transpose(std::span<const double> m) const;

private:
    const Lattice* lattice_;
    double p_;
};

/// Cosine of the angle between two nonzero vectors.
double cos_angle(const Point& x, const Point& z);

}  // namespace skembed
