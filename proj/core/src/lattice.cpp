#include "skembed/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skembed/error.hpp"

namespace skembed {

namespace {

void require_dimension(int d) {
    if (d != 2 && d != 3) {
        throw Error(ErrorCode::InvalidDimension, "dimension must be 2 or 3, got " + std::to_string(d));
    }
}

double lattice_norm(const Point& z) {
    return std::sqrt(static_cast<double>(z[0]) * z[0] + static_cast<double>(z[1]) * z[1] +
                     static_cast<double>(z[2]) * z[2]);
}

}  // namespace

SignedPermutation SignedPermutation::compose(const SignedPermutation& other) const {
    // (this ∘ other)(z)_i = sign[i] * (other z)[perm[i]] = sign[i] * other.sign[perm[i]] * z[other.perm[perm[i]]]
    SignedPermutation out;
    for (int i = 0; i < 3; ++i) {
        out.perm[i] = other.perm[perm[i]];
        out.sign[i] = sign[i] * other.sign[perm[i]];
    }
    return out;
}

SignedPermutation SignedPermutation::inverse() const {
    SignedPermutation out;
    for (int i = 0; i < 3; ++i) {
        out.perm[perm[i]] = i;
        out.sign[perm[i]] = sign[i];
    }
    return out;
}

std::vector<SignedPermutation> point_group(int d) {
    require_dimension(d);
    std::vector<SignedPermutation> group;
    std::array<int, 3> perm{0, 1, 2};
    do {
        // Only permute the first d coordinates.
        bool valid = true;
        for (int i = d; i < 3; ++i) valid = valid && perm[i] == i;
        if (!valid) continue;
        for (int mask = 0; mask < (1 << d); ++mask) {
            SignedPermutation m;
            m.perm = perm;
            for (int i = 0; i < d; ++i) m.sign[i] = (mask >> i) & 1 ? -1 : 1;
            group.push_back(m);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return group;
}

Lattice Lattice::build(const LatticeParams& params_in) {
    LatticeParams params = params_in;
    require_dimension(params.d);
    if (!(params.h > 0.0) || !std::isfinite(params.h)) {
        throw Error(ErrorCode::InvalidArgument, "spacing h must be positive");
    }
    if (!(params.outer_radius > 0.0)) {
        throw Error(ErrorCode::DegenerateDomain, "domain radius must be positive");
    }
    if (params.inner_radius < 0.0 || params.inner_radius >= params.outer_radius) {
        throw Error(ErrorCode::DegenerateDomain, "inner radius must lie in [0, R_O)");
    }
    if (params.shell_tol < 0.0) params.shell_tol = params.h / 2.0;

    Lattice lat;
    lat.params_ = params;
    const double eps = 1e-12 * std::max(1.0, params.outer_radius);
    const int reach = static_cast<int>(std::floor(params.outer_radius / params.h + 1e-9));
    const int zr = params.d == 3 ? reach : 0;
    for (int a = -reach; a <= reach; ++a) {
        for (int b = -reach; b <= reach; ++b) {
            for (int c = -zr; c <= zr; ++c) {
                Point z{a, b, c};
                const double r = lattice_norm(z) * params.h;
                if (r > params.outer_radius + eps) continue;
                if (params.inner_radius > 0.0 && r < params.inner_radius - eps) continue;
                lat.index_.emplace(z, lat.nodes_.size());
                lat.nodes_.push_back(z);
            }
        }
    }

    const std::size_t n = lat.nodes_.size();
    lat.interior_.assign(n, false);
    lat.norms_.resize(n);
    lat.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& z = lat.nodes_[i];
        lat.norms_[i] = lattice_norm(z) * params.h;
        int inside = 0;
        for (int axis = 0; axis < params.d; ++axis) {
            for (int step : {-1, 1}) {
                Point w = z;
                w[axis] += step;
                auto it = lat.index_.find(w);
                if (it != lat.index_.end()) {
                    lat.adjacency_.push_back(it->second);
                    ++inside;
                }
            }
        }
        lat.offsets_[i + 1] = lat.adjacency_.size();
        lat.interior_[i] = inside == 2 * params.d;
        if (lat.interior_[i]) ++lat.interior_count_;
    }

    // Shells: sorted distinct norms, greedily merged within shell_tol of the smallest.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lat.norms_[a] < lat.norms_[b]; });
    lat.shell_index_.assign(n, 0);
    const double merge_eps = 1e-9 * params.h;
    for (std::size_t k = 0; k < n;) {
        Shell shell;
        shell.radius = lat.norms_[order[k]];
        while (k < n && lat.norms_[order[k]] <= shell.radius + params.shell_tol + merge_eps) {
            shell.members.push_back(order[k]);
            ++k;
        }
        std::sort(shell.members.begin(), shell.members.end());
        for (std::size_t m : shell.members) lat.shell_index_[m] = lat.shells_.size();
        lat.shells_.push_back(std::move(shell));
    }
    if (lat.shells_.size() < 2) {
        throw Error(ErrorCode::DegenerateDomain, "domain holds fewer than two shells");
    }
    return lat;
}

Lattice build_lattice(int d, double h, double outer_radius, double shell_tol) {
    return Lattice::build(LatticeParams{d, h, outer_radius, shell_tol, 0.0});
}

std::optional<std::size_t> Lattice::index_of(const Point& z) const {
    auto it = index_.find(z);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double Lattice::physical_norm(const Point& z) const { return lattice_norm(z) * params_.h; }

std::size_t Lattice::nearest_shell(double r) const {
    std::size_t best = 0;
    for (std::size_t s = 1; s < shells_.size(); ++s) {
        if (std::abs(shells_[s].radius - r) < std::abs(shells_[best].radius - r)) best = s;
    }
    return best;
}

std::size_t Lattice::image(const SignedPermutation& m, std::size_t i) const {
    auto idx = index_of(m.apply(nodes_[i]));
    if (!idx) throw Error(ErrorCode::InvalidArgument, "node set is not point-group invariant");
    return *idx;
}

WalkKernel::WalkKernel(const Lattice& lattice)
    : lattice_(&lattice), p_(1.0 / (2.0 * lattice.dim())) {}

double WalkKernel::transition(std::size_t from, std::size_t to) const {
    if (!lattice_->is_interior(from)) return 0.0;
    for (std::size_t w : lattice_->neighbors(from)) {
        if (w == to) return p_;
    }
    return 0.0;
}

std::vector<double> WalkKernel::apply(std::span<const double> f) const {
    std::vector<double> out(lattice_->size(), 0.0);
    for (std::size_t z = 0; z < lattice_->size(); ++z) {
        if (!lattice_->is_interior(z)) continue;
        double acc = 0.0;
        for (std::size_t w : lattice_->neighbors(z)) acc += f[w];
        out[z] = p_ * acc;
    }
    return out;
}

std::vector<double> WalkKernel::apply_transpose(std::span<const double> m) const {
    std::vector<double> out(lattice_->size(), 0.0);
    for (std::size_t w = 0; w < lattice_->size(); ++w) {
        if (!lattice_->is_interior(w) || m[w] == 0.0) continue;
        for (std::size_t z : lattice_->neighbors(w)) out[z] += p_ * m[w];
    }
    return out;
}

double cos_angle(const Point& x, const Point& z) {
    const double nx = lattice_norm(x);
    const double nz = lattice_norm(z);
    if (nx == 0.0 || nz == 0.0) throw Error(ErrorCode::ZeroVector, "cos_angle needs nonzero vectors");
    double dot = 0.0;
    for (int i = 0; i < 3; ++i) dot += static_cast<double>(x[i]) * z[i];
    return std::clamp(dot / (nx * nz), -1.0, 1.0);
}

}  // namespace skembed
