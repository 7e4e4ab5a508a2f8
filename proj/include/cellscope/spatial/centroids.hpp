#ifndef CELLSCOPE_SPATIAL_CENTROIDS_HPP
#define CELLSCOPE_SPATIAL_CENTROIDS_HPP

#include "../anndata/dataset.hpp"
#include "../error.hpp"
#include "../stats/summation.hpp"
#include "geometry.hpp"

#include <span>
#include <string>
#include <vector>

namespace cellscope::spatial {

struct CategoryCentroid {
    std::string label;
    std::uint32_t category = 0;
    Point3 position;
    std::size_t count = 0;
};

/**
 * Mean position of the members of each category, used to place proximity
 * labels. Categories without members are omitted.
 */
inline std::vector<CategoryCentroid> category_centroids(std::span<const Point3> points, const anndata::AnnotationColumn& annotation) {
    if (annotation.codes.size() != points.size()) {
        throw Error(ErrorKind::DimensionMismatch, "annotation '" + annotation.name + "' does not match the point count");
    }
    const auto n_cat = annotation.categories.size();
    std::vector<stats::CompensatedSum> sx(n_cat), sy(n_cat), sz(n_cat);
    std::vector<std::size_t> counts(n_cat, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = annotation.codes[i];
        if (c < 0 || static_cast<std::size_t>(c) >= n_cat) {
            throw Error(ErrorKind::InvalidData, "annotation code out of range");
        }
        sx[c].add(points[i].x);
        sy[c].add(points[i].y);
        sz[c].add(points[i].z);
        ++counts[c];
    }

    std::vector<CategoryCentroid> out;
    for (std::size_t c = 0; c < n_cat; ++c) {
        if (counts[c] == 0) {
            continue;
        }
        const double n = static_cast<double>(counts[c]);
        out.push_back({annotation.categories[c], static_cast<std::uint32_t>(c), {sx[c].value() / n, sy[c].value() / n, sz[c].value() / n}, counts[c]});
    }
    return out;
}

}

#endif
