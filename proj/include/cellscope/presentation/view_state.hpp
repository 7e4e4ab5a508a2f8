#ifndef CELLSCOPE_PRESENTATION_VIEW_STATE_HPP
#define CELLSCOPE_PRESENTATION_VIEW_STATE_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace cellscope::presentation {

enum class ViewMode { Metadata, Expression };

inline std::string_view to_string(ViewMode m) {
    return m == ViewMode::Metadata ? "metadata" : "expression";
}

struct ViewState {
    ViewMode mode = ViewMode::Metadata;
    std::size_t annotation_count = 0;
    std::size_t active_annotation = 0;
    std::vector<std::uint32_t> gene_set;
    std::size_t gene_cursor = 0;

    bool operator==(const ViewState&) const = default;
};

namespace view_action {
struct ToggleMode {};
struct NextAnnotation {};
struct NextGene {};
struct PrevGene {};
struct LoadGeneSet {
    std::vector<std::uint32_t> genes;
};
}

using ViewAction = std::variant<view_action::ToggleMode, view_action::NextAnnotation, view_action::NextGene, view_action::PrevGene, view_action::LoadGeneSet>;

/**
 * Pure state transition for the viewer controls. Cursor moves wrap around;
 * moving within an empty gene set leaves the state unchanged.
 */
inline ViewState step_view(ViewState state, const ViewAction& action) {
    struct Visitor {
        ViewState& s;
        void operator()(const view_action::ToggleMode&) {
            s.mode = s.mode == ViewMode::Metadata ? ViewMode::Expression : ViewMode::Metadata;
        }
        void operator()(const view_action::NextAnnotation&) {
            if (s.annotation_count > 0) {
                s.active_annotation = (s.active_annotation + 1) % s.annotation_count;
            }
        }
        void operator()(const view_action::NextGene&) {
            if (!s.gene_set.empty()) {
                s.gene_cursor = (s.gene_cursor + 1) % s.gene_set.size();
            }
        }
        void operator()(const view_action::PrevGene&) {
            if (!s.gene_set.empty()) {
                s.gene_cursor = (s.gene_cursor + s.gene_set.size() - 1) % s.gene_set.size();
            }
        }
        void operator()(const view_action::LoadGeneSet& a) {
            s.gene_set = a.genes;
            s.gene_cursor = 0;
        }
    };
    std::visit(Visitor{state}, action);
    return state;
}

/// Gene under the cursor, if the set is non-empty.
inline std::optional<std::uint32_t> current_gene(const ViewState& state) {
    if (state.gene_set.empty()) {
        return std::nullopt;
    }
    return state.gene_set[state.gene_cursor];
}

}

#endif
