#ifndef CELLSCOPE_STATS_DIFFERENTIAL_HPP
#define CELLSCOPE_STATS_DIFFERENTIAL_HPP

#include "../error.hpp"
#include "../store/store.hpp"
#include "incomplete_beta.hpp"
#include "types.hpp"
#include "welch.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <thread>
#include <vector>

/**
 * @file differential.hpp
 *
 * @brief Selection-versus-rest differential expression over a store, and the
 * per-category marker precompute built on it.
 */

namespace cellscope::stats {

struct DifferentialOptions {
    /// Worker threads for the per-gene loop; 0 picks the hardware concurrency.
    std::size_t threads = 0;
};

/**
 * Complete test result for one gene. `t` is 0 and `p_value` 1 when both groups
 * have zero variance and equal means.
 */
inline MarkerRecord test_gene(const store::GeneColumnView& column, std::span<const std::uint8_t> membership, std::size_t n_selected) {
    const auto [selected, unselected] = group_stats_from_membership(column.cell_indices, column.values, membership, n_selected);
    const auto w = welch_t(selected, unselected);
    MarkerRecord rec;
    rec.gene_index = column.gene_index;
    rec.t = w.t;
    rec.df = w.df;
    rec.p_value = t_two_sided_p(w.t, w.df);
    rec.log_fold_change = log_fold_change(selected, unselected);
    return rec;
}

namespace detail {

inline std::size_t worker_count(const DifferentialOptions& options, std::size_t n_genes) {
    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(threads, n_genes / 64 + 1));
}

inline std::vector<MarkerRecord> keep_top(std::vector<MarkerRecord> records) {
    const auto keep = std::min(records.size(), marker_table_size);
    std::partial_sort(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(keep), records.end(), ranks_before);
    records.resize(keep);
    return records;
}

}

/**
 * Rank every gene by the Welch test between the cells in `membership` and the
 * rest, returning the best ten. Each worker keeps its own top ten; the ranking
 * is a total order so the merged result does not depend on the partition.
 */
inline MarkerTable differential_expression(
    const store::Store& store,
    std::span<const std::uint8_t> membership,
    std::size_t n_selected,
    const std::string& label = "selection",
    const DifferentialOptions& options = {})
{
    const auto n_cells = store.n_cells();
    if (n_selected < 2 || n_cells - n_selected < 2) {
        throw Error(ErrorKind::SelectionTooSmall, "selected " + std::to_string(n_selected) + " of " + std::to_string(n_cells) + " cells; both groups need at least 2");
    }

    const auto n_genes = store.n_genes();
    const auto workers = detail::worker_count(options, n_genes);
    std::vector<std::vector<MarkerRecord>> partial(workers);
    auto run = [&](std::size_t w) {
        const auto begin = n_genes * w / workers, end = n_genes * (w + 1) / workers;
        std::vector<MarkerRecord> local;
        local.reserve(end - begin);
        for (auto g = begin; g < end; ++g) {
            local.push_back(test_gene(store.column(g), membership, n_selected));
        }
        partial[w] = detail::keep_top(std::move(local));
    };

    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    run(w);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        pool.clear();
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    std::vector<MarkerRecord> merged;
    for (auto& p : partial) {
        merged.insert(merged.end(), p.begin(), p.end());
    }
    MarkerTable table;
    table.group_label = label;
    table.records = detail::keep_top(std::move(merged));
    for (auto& r : table.records) {
        r.gene_name = store.gene_names()[r.gene_index];
    }
    return table;
}

inline MarkerTable differential_expression(const store::Store& store, const SelectionMask& mask, const DifferentialOptions& options = {}) {
    if (mask.n_cells() != store.n_cells()) {
        throw Error(ErrorKind::DimensionMismatch, "selection mask is for " + std::to_string(mask.n_cells()) + " cells, store has " + std::to_string(store.n_cells()));
    }
    const auto membership = mask.membership();
    return differential_expression(store, membership, mask.size(), "selection", options);
}

/// Reason recorded for categories that cannot be tested.
inline constexpr const char* group_too_small_reason = "group too small";

/**
 * Markers for every category of every annotation against all other cells.
 * Categories with fewer than 2 cells inside or outside are recorded as
 * skipped rather than failing the run.
 */
inline MarkerCollection precompute_markers(const store::Store& store, const DifferentialOptions& options = {}, const std::function<void(std::size_t, std::size_t)>& progress = {}) {
    MarkerCollection out;
    const auto n_cells = store.n_cells();
    std::size_t total = 0, done = 0;
    for (const auto& annotation : store.annotations()) {
        total += annotation.categories.size();
    }
    std::vector<std::uint8_t> membership(n_cells);
    for (const auto& annotation : store.annotations()) {
        std::vector<std::size_t> counts(annotation.categories.size(), 0);
        for (auto c : annotation.codes) {
            ++counts[static_cast<std::size_t>(c)];
        }
        for (std::size_t cat = 0; cat < annotation.categories.size(); ++cat) {
            MarkerEntry entry;
            entry.annotation = annotation.name;
            entry.category = annotation.categories[cat];
            entry.table.group_label = entry.category;
            if (counts[cat] < 2 || n_cells - counts[cat] < 2) {
                entry.skipped = true;
                entry.reason = group_too_small_reason;
            } else {
                for (std::size_t i = 0; i < n_cells; ++i) {
                    membership[i] = static_cast<std::size_t>(annotation.codes[i]) == cat ? 1 : 0;
                }
                entry.table = differential_expression(store, membership, counts[cat], entry.category, options);
            }
            out.push_back(std::move(entry));
            if (progress) {
                progress(++done, total);
            }
        }
    }
    return out;
}

/**
 * Compute markers for the store at `path` and persist them in its marker
 * section. Returns the collection that was written.
 */
inline MarkerCollection precompute_and_store(const std::filesystem::path& path, const DifferentialOptions& options = {}, const std::function<void(std::size_t, std::size_t)>& progress = {}) {
    MarkerCollection markers;
    {
        const auto s = store::Store::open(path);
        markers = precompute_markers(s, options, progress);
    }
    store::attach_markers(path, markers);
    return markers;
}

/**
 * Mask of the cells carrying `category` in `annotation`.
 */
inline SelectionMask category_mask(const anndata::AnnotationColumn& annotation, std::string_view category) {
    auto it = std::find(annotation.categories.begin(), annotation.categories.end(), category);
    if (it == annotation.categories.end()) {
        throw Error(ErrorKind::NotFound, "annotation '" + annotation.name + "' has no category '" + std::string(category) + "'");
    }
    const auto code = static_cast<std::int32_t>(it - annotation.categories.begin());
    std::vector<std::uint32_t> cells;
    for (std::size_t i = 0; i < annotation.codes.size(); ++i) {
        if (annotation.codes[i] == code) {
            cells.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return SelectionMask(std::move(cells), annotation.codes.size());
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_tsv_rows(std::ostream& out, std::string_view annotation, std::string_view category, const MarkerTable& table) {
    for (const auto& r : table.records) {
        out << annotation << '\t' << category << '\t' << r.gene_name << '\t' << format_double(r.t) << '\t' << format_double(r.df) << '\t'
            << format_double(r.p_value) << '\t' << format_double(r.log_fold_change) << '\n';
    }
}

}

inline constexpr const char* marker_tsv_header = "annotation\tcategory\tgene\tt\tdf\tp_value\tlog2_fc\n";

/**
 * TSV export of marker tables; skipped categories contribute no rows.
 */
inline void write_markers_tsv(std::ostream& out, const MarkerCollection& markers) {
    out << marker_tsv_header;
    for (const auto& e : markers) {
        detail::write_tsv_rows(out, e.annotation, e.category, e.table);
    }
}

inline void write_markers_tsv(std::ostream& out, const MarkerTable& table, std::string_view annotation = "selection") {
    out << marker_tsv_header;
    detail::write_tsv_rows(out, annotation, table.group_label, table);
}

}

#endif
