#ifndef CELLSCOPE_SPATIAL_LASSO_HPP
#define CELLSCOPE_SPATIAL_LASSO_HPP

#include "../error.hpp"
#include "geometry.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace cellscope::spatial {

/**
 * Screen-space lasso. Vertices are in normalized device coordinates and the
 * polygon closes implicitly. `view_transform` is the projection * view
 * matrix the viewer rendered with.
 */
struct LassoPolygon {
    std::vector<Point2> vertices;
    Mat4 view_transform;
};

/// Twice the signed area (shoelace formula).
inline double twice_signed_area(std::span<const Point2> vertices) {
    double acc = 0;
    for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
        acc += vertices[j].x * vertices[i].y - vertices[i].x * vertices[j].y;
    }
    return acc;
}

inline void validate(const LassoPolygon& lasso) {
    if (lasso.vertices.size() < 3) {
        throw Error(ErrorKind::DegeneratePolygon, "lasso needs at least 3 vertices");
    }
    for (const auto& v : lasso.vertices) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            throw Error(ErrorKind::DegeneratePolygon, "lasso vertex is not finite");
        }
    }
    if (twice_signed_area(lasso.vertices) == 0) {
        throw Error(ErrorKind::DegeneratePolygon, "lasso has zero area");
    }
}

/// Even-odd rule (crossing number) point-in-polygon test.
inline bool inside_even_odd(std::span<const Point2> vertices, const Point2& p) {
    bool inside = false;
    for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
        const auto& a = vertices[i];
        const auto& b = vertices[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

/**
 * Project a point to normalized device coordinates. Returns false for points
 * behind the camera (w <= 0) or outside the [-1, 1] depth range.
 */
inline bool project_to_ndc(const Mat4& transform, const Point3& p, Point2& ndc) {
    const auto clip = transform.apply(p);
    const double w = clip[3];
    if (!(w > 0)) {
        return false;
    }
    const double depth = clip[2] / w;
    if (depth < -1 || depth > 1) {
        return false;
    }
    ndc = {clip[0] / w, clip[1] / w};
    return true;
}

/**
 * Indices of the points whose projection lies inside the lasso, ascending.
 */
inline std::vector<std::uint32_t> lasso_select(std::span<const Point3> points, const LassoPolygon& lasso) {
    validate(lasso);
    std::vector<std::uint32_t> out;
    Point2 ndc;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (project_to_ndc(lasso.view_transform, points[i], ndc) && inside_even_odd(lasso.vertices, ndc)) {
            out.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return out;
}

}

#endif
