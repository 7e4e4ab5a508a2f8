#ifndef CELLSCOPE_SPATIAL_POINT_INDEX_HPP
#define CELLSCOPE_SPATIAL_POINT_INDEX_HPP

#include "../error.hpp"
#include "geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

/**
 * @file point_index.hpp
 *
 * @brief Uniform-grid index answering closed-ball queries on a static point
 * cloud.
 */

namespace cellscope::spatial {

/// Target mean number of points per grid bucket.
inline constexpr double target_bucket_occupancy = 8.0;

class PointIndex {
public:
    /**
     * Bucket the points on a grid with cell size h = (8 V / n)^(1/k), where V
     * is the k-dimensional volume spanned by the axes with nonzero extent. A
     * fully coincident cloud uses h = 1.
     */
    static PointIndex build(std::vector<Point3> points) {
        if (points.empty()) {
            throw Error(ErrorKind::EmptyPointSet, "cannot index an empty point set");
        }
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
                throw Error(ErrorKind::NonFiniteCoordinate, "point " + std::to_string(i) + " has a non-finite coordinate");
            }
        }

        PointIndex idx;
        idx.points_ = std::move(points);
        idx.lo_ = {idx.points_[0].x, idx.points_[0].y, idx.points_[0].z};
        idx.hi_ = idx.lo_;
        for (const auto& p : idx.points_) {
            const std::array<double, 3> c{p.x, p.y, p.z};
            for (int a = 0; a < 3; ++a) {
                idx.lo_[a] = std::min(idx.lo_[a], c[a]);
                idx.hi_[a] = std::max(idx.hi_[a], c[a]);
            }
        }

        double volume = 1;
        int spanned = 0;
        for (int a = 0; a < 3; ++a) {
            const double extent = idx.hi_[a] - idx.lo_[a];
            if (extent > 0) {
                volume *= extent;
                ++spanned;
            }
        }
        idx.h_ = 1.0;
        if (spanned > 0) {
            const double n = static_cast<double>(idx.points_.size());
            const double h = std::pow(target_bucket_occupancy * volume / n, 1.0 / spanned);
            if (std::isfinite(h) && h > 0) {
                idx.h_ = h;
            }
        }

        // Strongly anisotropic clouds can ask for far more buckets than
        // points; coarsen until the grid is O(n).
        const double bucket_cap = 4.0 * static_cast<double>(idx.points_.size()) + 64.0;
        std::array<double, 3> cells{};
        for (;;) {
            double product = 1;
            for (int a = 0; a < 3; ++a) {
                cells[a] = std::floor((idx.hi_[a] - idx.lo_[a]) / idx.h_) + 1;
                product *= cells[a];
            }
            if (product <= bucket_cap) {
                break;
            }
            idx.h_ *= 2;
        }
        std::size_t total = 1;
        for (int a = 0; a < 3; ++a) {
            idx.dims_[a] = static_cast<std::size_t>(cells[a]);
            total *= idx.dims_[a];
        }

        std::vector<std::size_t> bucket_of(idx.points_.size());
        idx.bucket_start_.assign(total + 1, 0);
        for (std::size_t i = 0; i < idx.points_.size(); ++i) {
            bucket_of[i] = idx.bucket_id(idx.points_[i]);
            ++idx.bucket_start_[bucket_of[i] + 1];
        }
        for (std::size_t b = 0; b < total; ++b) {
            idx.bucket_start_[b + 1] += idx.bucket_start_[b];
        }
        std::vector<std::size_t> cursor(idx.bucket_start_.begin(), idx.bucket_start_.end() - 1);
        idx.members_.resize(idx.points_.size());
        for (std::size_t i = 0; i < idx.points_.size(); ++i) {
            idx.members_[cursor[bucket_of[i]]++] = static_cast<std::uint32_t>(i);
        }
        return idx;
    }

    /**
     * Indices of all points at Euclidean distance <= radius from `center`,
     * ascending.
     */
    std::vector<std::uint32_t> sphere_select(const Point3& center, double radius) const {
        if (!(radius > 0)) {
            throw Error(ErrorKind::NonPositiveRadius, "radius must be positive");
        }
        if (!std::isfinite(center.x) || !std::isfinite(center.y) || !std::isfinite(center.z)) {
            throw Error(ErrorKind::NonFiniteCoordinate, "query center is not finite");
        }

        const std::array<double, 3> c{center.x, center.y, center.z};
        std::array<std::size_t, 3> first{}, last{};
        for (int a = 0; a < 3; ++a) {
            // One extra bucket of slack on both sides absorbs rounding in the
            // bucket arithmetic; the distance test decides membership.
            const double from = std::floor((c[a] - radius - lo_[a]) / h_) - 1;
            const double to = std::floor((c[a] + radius - lo_[a]) / h_) + 1;
            const double max_cell = static_cast<double>(dims_[a] - 1);
            if (to < 0 || from > max_cell) {
                return {};
            }
            first[a] = static_cast<std::size_t>(std::max(0.0, from));
            last[a] = static_cast<std::size_t>(std::min(max_cell, to));
        }

        const double r2 = radius * radius;
        std::vector<std::uint32_t> out;
        for (auto bz = first[2]; bz <= last[2]; ++bz) {
            for (auto by = first[1]; by <= last[1]; ++by) {
                for (auto bx = first[0]; bx <= last[0]; ++bx) {
                    const auto b = (bz * dims_[1] + by) * dims_[0] + bx;
                    for (auto k = bucket_start_[b]; k < bucket_start_[b + 1]; ++k) {
                        const auto i = members_[k];
                        if (within(points_[i], center, r2)) {
                            out.push_back(i);
                        }
                    }
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Closed-ball membership test shared by the index and callers checking it.
    static bool within(const Point3& p, const Point3& center, double r2) {
        const double dx = p.x - center.x, dy = p.y - center.y, dz = p.z - center.z;
        return dx * dx + dy * dy + dz * dz <= r2;
    }

    const std::vector<Point3>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double cell_size() const { return h_; }
    std::array<std::size_t, 3> grid_dims() const { return dims_; }
    std::size_t bucket_count() const { return bucket_start_.size() - 1; }
    std::array<double, 3> bounds_min() const { return lo_; }
    std::array<double, 3> bounds_max() const { return hi_; }

    /// Number of points registered in bucket `b`.
    std::size_t bucket_size(std::size_t b) const { return bucket_start_[b + 1] - bucket_start_[b]; }

private:
    std::size_t axis_cell(double v, int a) const {
        const double cell = std::floor((v - lo_[a]) / h_);
        const double max_cell = static_cast<double>(dims_[a] - 1);
        return static_cast<std::size_t>(std::clamp(cell, 0.0, max_cell));
    }

    std::size_t bucket_id(const Point3& p) const {
        return (axis_cell(p.z, 2) * dims_[1] + axis_cell(p.y, 1)) * dims_[0] + axis_cell(p.x, 0);
    }

    std::vector<Point3> points_;
    std::array<double, 3> lo_{}, hi_{};
    double h_ = 1;
    std::array<std::size_t, 3> dims_{1, 1, 1};
    std::vector<std::size_t> bucket_start_;
    std::vector<std::uint32_t> members_;
};

inline PointIndex build_index(std::vector<Point3> points) {
    return PointIndex::build(std::move(points));
}

inline std::vector<std::uint32_t> sphere_select(const PointIndex& index, const Point3& center, double radius) {
    return index.sphere_select(center, radius);
}

}

#endif
