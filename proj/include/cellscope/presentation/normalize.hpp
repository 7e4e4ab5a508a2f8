#ifndef CELLSCOPE_PRESENTATION_NORMALIZE_HPP
#define CELLSCOPE_PRESENTATION_NORMALIZE_HPP

#include "../error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

/**
 * @file normalize.hpp
 *
 * @brief Expression-to-color normalization. Values are divided by the 99th
 * percentile (nearest rank) of the nonzero values and clamped to 1, so a few
 * extreme cells do not wash out weakly expressing ones.
 */

namespace cellscope::presentation {

/// Below this many nonzeros the clip value is simply the maximum.
inline constexpr std::size_t percentile_min_nonzeros = 100;

struct NormalizationInfo {
    std::string gene_name;
    double raw_min = 0;
    double raw_max = 0;
    double clip_value = 1;

    bool operator==(const NormalizationInfo&) const = default;
};

struct NormalizedExpression {
    std::vector<double> values;
    NormalizationInfo info;
};

/**
 * Nearest-rank 99th percentile: the ceil(0.99 m)-th smallest of m values,
 * computed in integers. Reorders `values`.
 */
inline double nearest_rank_p99(std::vector<double>& values) {
    const auto m = values.size();
    const auto rank = (99 * m + 99) / 100;
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

inline NormalizedExpression normalize_expression(std::span<const double> values, std::string gene_name = {}) {
    NormalizedExpression out;
    out.info.gene_name = std::move(gene_name);

    std::vector<double> nonzero;
    bool first = true;
    for (auto v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::InvalidData, "expression value is not finite");
        }
        if (v < 0) {
            throw Error(ErrorKind::NegativeExpression, "expression values must be non-negative");
        }
        if (first) {
            out.info.raw_min = out.info.raw_max = v;
            first = false;
        } else {
            out.info.raw_min = std::min(out.info.raw_min, v);
            out.info.raw_max = std::max(out.info.raw_max, v);
        }
        if (v != 0) {
            nonzero.push_back(v);
        }
    }

    out.values.assign(values.size(), 0.0);
    if (nonzero.empty()) {
        out.info.clip_value = 1;
        return out;
    }

    out.info.clip_value = nonzero.size() < percentile_min_nonzeros ? *std::max_element(nonzero.begin(), nonzero.end()) : nearest_rank_p99(nonzero);
    const double clip = out.info.clip_value;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.values[i] = std::min(values[i] / clip, 1.0);
    }
    return out;
}

/// Fixed-point encoding used on the wire: round(v * 65535).
inline std::vector<std::uint16_t> quantize_u16(std::span<const double> normalized) {
    std::vector<std::uint16_t> out(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        out[i] = static_cast<std::uint16_t>(std::lround(std::clamp(normalized[i], 0.0, 1.0) * 65535.0));
    }
    return out;
}

inline double dequantize_u16(std::uint16_t q) {
    return static_cast<double>(q) / 65535.0;
}

}

#endif
