#ifndef CELLSCOPE_SPATIAL_SELECTION_HPP
#define CELLSCOPE_SPATIAL_SELECTION_HPP

#include "../stats/types.hpp"

#include <algorithm>
#include <iterator>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cellscope::spatial {

enum class CombineMode { Add, Replace, Reset };

inline std::optional<CombineMode> parse_combine_mode(std::string_view s) {
    if (s == "add") return CombineMode::Add;
    if (s == "replace") return CombineMode::Replace;
    if (s == "reset") return CombineMode::Reset;
    return std::nullopt;
}

/**
 * Fold newly hit cells into a selection: union for Add, the addition alone
 * for Replace, and an empty selection for Reset.
 */
inline stats::SelectionMask combine_selection(const stats::SelectionMask& current, std::span<const std::uint32_t> addition, CombineMode mode) {
    std::vector<std::uint32_t> added(addition.begin(), addition.end());
    switch (mode) {
        case CombineMode::Reset:
            return stats::SelectionMask({}, current.n_cells());
        case CombineMode::Replace:
            return stats::SelectionMask(std::move(added), current.n_cells());
        case CombineMode::Add: {
            std::sort(added.begin(), added.end());
            std::vector<std::uint32_t> merged;
            merged.reserve(current.size() + added.size());
            std::set_union(current.selected().begin(), current.selected().end(), added.begin(), added.end(), std::back_inserter(merged));
            return stats::SelectionMask(std::move(merged), current.n_cells());
        }
    }
    return current;
}

}

#endif
