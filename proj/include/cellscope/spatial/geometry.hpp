#ifndef CELLSCOPE_SPATIAL_GEOMETRY_HPP
#define CELLSCOPE_SPATIAL_GEOMETRY_HPP

#include <array>
#include <span>
#include <vector>

namespace cellscope::spatial {

struct Point3 {
    double x = 0, y = 0, z = 0;

    bool operator==(const Point3&) const = default;
};

struct Point2 {
    double x = 0, y = 0;

    bool operator==(const Point2&) const = default;
};

/// Widen packed xyz float triples (as served from a store) to points.
inline std::vector<Point3> points_from_xyz(std::span<const float> xyz) {
    std::vector<Point3> out(xyz.size() / 3);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
    }
    return out;
}

/**
 * 4x4 matrix in row-major order; points transform as column vectors,
 * clip = M * (x, y, z, 1).
 */
struct Mat4 {
    std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

    static Mat4 identity() { return {}; }

    std::array<double, 4> apply(const Point3& p) const {
        std::array<double, 4> out{};
        for (int r = 0; r < 4; ++r) {
            out[r] = m[r * 4] * p.x + m[r * 4 + 1] * p.y + m[r * 4 + 2] * p.z + m[r * 4 + 3];
        }
        return out;
    }

    bool operator==(const Mat4&) const = default;
};

}

#endif
