#pragma once

#include "imdpv/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace imdpv {

using Index = std::int64_t;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vector = VectorX<double>;
using IndexVector = Eigen::Matrix<Index, Eigen::Dynamic, 1>;

namespace detail {
// Points within this fraction of a tile width below a tile edge are snapped
// onto the edge, so that e.g. -0.3 lands in the tile starting at -0.30 even
// though (-0.3 + 1.2) / 0.05 evaluates to 17.999999999999996.
constexpr double kEdgeSnap = 1e-9;
} // namespace detail

/**
 * Abstract tile: one zero-based integer index per dimension.
 * Ordering is lexicographic, first dimension most significant.
 */
struct Tile {
    Eigen::VectorXi indices;

    Tile() = default;
    explicit Tile(Eigen::VectorXi idx) : indices(std::move(idx)) {}
    Tile(std::initializer_list<int> idx) : indices(static_cast<Eigen::Index>(idx.size())) {
        std::copy(idx.begin(), idx.end(), indices.data());
    }

    Index dims() const { return indices.size(); }

    friend bool operator==(const Tile& a, const Tile& b) {
        return a.indices.size() == b.indices.size() && a.indices == b.indices;
    }
    friend bool operator<(const Tile& a, const Tile& b) {
        return std::lexicographical_compare(a.indices.data(), a.indices.data() + a.indices.size(),
                                            b.indices.data(), b.indices.data() + b.indices.size());
    }
};

/// Axis-aligned box [min_corner, max_corner].
template <typename Scalar>
struct Box {
    VectorX<Scalar> min_corner;
    VectorX<Scalar> max_corner;

    Index dims() const { return min_corner.size(); }
    VectorX<Scalar> center() const { return (min_corner + max_corner) / Scalar(2); }
    VectorX<Scalar> half_widths() const { return (max_corner - min_corner) / Scalar(2); }

    bool contains(const VectorX<Scalar>& p) const {
        return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
    }

    /// Smallest box containing both.
    Box hull(const Box& other) const {
        return {min_corner.cwiseMin(other.min_corner), max_corner.cwiseMax(other.max_corner)};
    }
};

/**
 * Uniform hyper-rectangular tiling of [lower, upper].
 *
 * Tiles are half-open [lo, lo + width) except the last tile of every
 * dimension, which is closed and truncated at the upper bound when the
 * extent is not a multiple of the width.
 */
template <typename Scalar>
class GridSpec {
public:
    using VectorType = VectorX<Scalar>;

    GridSpec() = default;

    GridSpec(VectorType lower, VectorType upper, VectorType widths)
        : lower_(std::move(lower)), upper_(std::move(upper)), widths_(std::move(widths)) {
        const Index d = lower_.size();
        if (d == 0)
            throw InputError("grid must have at least one dimension");
        if (upper_.size() != d || widths_.size() != d)
            throw InputError("grid bound and width vectors differ in length");
        counts_.resize(d);
        strides_.resize(d);
        for (Index i = 0; i < d; ++i) {
            if (!std::isfinite(double(lower_[i])) || !std::isfinite(double(upper_[i])))
                throw InputError("grid bounds must be finite");
            if (!(lower_[i] < upper_[i]))
                throw InputError("grid lower bound must be below upper bound in dimension " +
                                 std::to_string(i));
            if (!(widths_[i] > 0) || !std::isfinite(double(widths_[i])))
                throw InputError("tile width must be positive in dimension " + std::to_string(i));
            const double ratio = double((upper_[i] - lower_[i]) / widths_[i]);
            const double n = std::ceil(ratio - detail::kEdgeSnap);
            if (!(n >= 1) || n > 1e8)
                throw InputError("tile count out of range in dimension " + std::to_string(i));
            counts_[i] = static_cast<int>(n);
        }
        Index total = 1;
        for (Index i = d - 1; i >= 0; --i) {
            strides_[i] = total;
            total *= counts_[i];
            if (total > (Index(1) << 40))
                throw InputError("grid has too many tiles");
        }
        num_tiles_ = total;
    }

    Index dims() const { return lower_.size(); }
    const VectorType& lower() const { return lower_; }
    const VectorType& upper() const { return upper_; }
    const VectorType& widths() const { return widths_; }
    /// Tiles per dimension.
    const Eigen::VectorXi& counts() const { return counts_; }
    const IndexVector& strides() const { return strides_; }
    Index num_tiles() const { return num_tiles_; }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.dims() == b.dims() && a.lower_ == b.lower_ && a.upper_ == b.upper_ &&
               a.widths_ == b.widths_;
    }

private:
    VectorType lower_, upper_, widths_;
    Eigen::VectorXi counts_;
    IndexVector strides_;
    Index num_tiles_ = 0;
};

using Grid = GridSpec<double>;
using BoxD = Box<double>;

namespace detail {
template <typename Scalar>
void check_dims(Index got, const GridSpec<Scalar>& grid, const char* what) {
    if (got != grid.dims())
        throw InputError(std::string(what) + " has dimension " + std::to_string(got) +
                         ", grid has " + std::to_string(grid.dims()));
}

template <typename Scalar>
int coordinate_index(Scalar x, const GridSpec<Scalar>& grid, Index d, bool& clamped) {
    const double r = double((x - grid.lower()[d]) / grid.widths()[d]);
    const double f = std::floor(r + kEdgeSnap);
    const int last = grid.counts()[d] - 1;
    if (f < 0) {
        clamped = clamped || r < -kEdgeSnap;
        return 0;
    }
    if (f > last) {
        // the upper bound itself belongs to the closed last tile
        clamped = clamped || x > grid.upper()[d] + Scalar(kEdgeSnap) * grid.widths()[d];
        return last;
    }
    return static_cast<int>(f);
}
} // namespace detail

/**
 * Abstraction function: maps a point to the tile containing it. Points
 * outside the grid are clamped to the nearest boundary tile and `clamped`
 * (when given) is set.
 */
template <typename Scalar>
Tile abstract_point(const VectorX<Scalar>& point, const GridSpec<Scalar>& grid,
                    bool* clamped = nullptr) {
    detail::check_dims(point.size(), grid, "point");
    if (!point.allFinite())
        throw InputError("cannot abstract a non-finite point");
    Tile t;
    t.indices.resize(point.size());
    bool c = false;
    for (Index d = 0; d < point.size(); ++d)
        t.indices[d] = detail::coordinate_index(point[d], grid, d, c);
    if (clamped)
        *clamped = c;
    return t;
}

/// Concretization: the box covered by a tile.
template <typename Scalar>
Box<Scalar> concretize(const Tile& tile, const GridSpec<Scalar>& grid) {
    detail::check_dims(tile.dims(), grid, "tile");
    Box<Scalar> b;
    b.min_corner.resize(grid.dims());
    b.max_corner.resize(grid.dims());
    for (Index d = 0; d < grid.dims(); ++d) {
        const int i = tile.indices[d];
        if (i < 0 || i >= grid.counts()[d])
            throw InputError("tile index " + std::to_string(i) + " out of range in dimension " +
                             std::to_string(d));
        b.min_corner[d] = grid.lower()[d] + Scalar(i) * grid.widths()[d];
        b.max_corner[d] =
            std::min<Scalar>(grid.lower()[d] + Scalar(i + 1) * grid.widths()[d], grid.upper()[d]);
    }
    return b;
}

template <typename Scalar>
Index flat_index(const Tile& tile, const GridSpec<Scalar>& grid) {
    detail::check_dims(tile.dims(), grid, "tile");
    Index flat = 0;
    for (Index d = 0; d < grid.dims(); ++d) {
        if (tile.indices[d] < 0 || tile.indices[d] >= grid.counts()[d])
            throw InputError("tile index out of range in dimension " + std::to_string(d));
        flat += Index(tile.indices[d]) * grid.strides()[d];
    }
    return flat;
}

template <typename Scalar>
Tile tile_at(Index flat, const GridSpec<Scalar>& grid) {
    if (flat < 0 || flat >= grid.num_tiles())
        throw InputError("flat tile index " + std::to_string(flat) + " out of range");
    Tile t;
    t.indices.resize(grid.dims());
    for (Index d = 0; d < grid.dims(); ++d) {
        t.indices[d] = static_cast<int>(flat / grid.strides()[d]);
        flat %= grid.strides()[d];
    }
    return t;
}

template <typename Scalar>
Index abstract_index(const VectorX<Scalar>& point, const GridSpec<Scalar>& grid,
                     bool* clamped = nullptr) {
    return flat_index(abstract_point(point, grid, clamped), grid);
}

template <typename Scalar>
Box<Scalar> concretize(Index flat, const GridSpec<Scalar>& grid) {
    return concretize(tile_at(flat, grid), grid);
}

/// Every tile exactly once, in lexicographic index order.
template <typename Scalar>
std::vector<Tile> enumerate_tiles(const GridSpec<Scalar>& grid) {
    std::vector<Tile> tiles;
    tiles.reserve(static_cast<std::size_t>(grid.num_tiles()));
    for (Index k = 0; k < grid.num_tiles(); ++k)
        tiles.push_back(tile_at(k, grid));
    return tiles;
}

/**
 * Signed display labels: index plus round(lower / width) when the lower
 * bound sits on a multiple of the width (so [-1.2, 0.6] at width 0.05 labels
 * its tiles -24 .. 11), otherwise the zero-based index.
 */
template <typename Scalar>
Eigen::VectorXi tile_label(const Tile& tile, const GridSpec<Scalar>& grid) {
    detail::check_dims(tile.dims(), grid, "tile");
    Eigen::VectorXi label = tile.indices;
    for (Index d = 0; d < grid.dims(); ++d) {
        const double q = double(grid.lower()[d] / grid.widths()[d]);
        const double r = std::round(q);
        if (std::abs(q - r) < 1e-6)
            label[d] += static_cast<int>(r);
    }
    return label;
}

/**
 * Flat indices of all tiles that intersect a closed box, in lexicographic
 * order. The box is clipped to the grid first; `clipped` reports whether it
 * extended outside the domain.
 */
template <typename Scalar>
std::vector<Index> tiles_intersecting(const Box<Scalar>& box, const GridSpec<Scalar>& grid,
                                      bool* clipped = nullptr) {
    detail::check_dims(box.dims(), grid, "box");
    const Index d = grid.dims();
    Eigen::VectorXi lo(d), hi(d);
    bool c = false;
    for (Index i = 0; i < d; ++i) {
        if (!(box.min_corner[i] <= box.max_corner[i]))
            throw InputError("box with min corner above max corner");
        lo[i] = detail::coordinate_index(box.min_corner[i], grid, i, c);
        hi[i] = detail::coordinate_index(box.max_corner[i], grid, i, c);
        c = c || box.min_corner[i] < grid.lower()[i];
    }
    if (clipped)
        *clipped = c;
    std::vector<Index> out;
    Eigen::VectorXi cur = lo;
    while (true) {
        Index flat = 0;
        for (Index i = 0; i < d; ++i)
            flat += Index(cur[i]) * grid.strides()[i];
        out.push_back(flat);
        Index i = d - 1;
        while (i >= 0 && cur[i] == hi[i]) {
            cur[i] = lo[i];
            --i;
        }
        if (i < 0)
            break;
        ++cur[i];
    }
    return out;
}

} // namespace imdpv
