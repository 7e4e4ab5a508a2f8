#ifndef CELLSCOPE_STATS_WELCH_HPP
#define CELLSCOPE_STATS_WELCH_HPP

#include "../error.hpp"
#include "../store/store.hpp"
#include "summation.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>

namespace cellscope::stats {

/// Pseudocount added to both means before taking the log ratio.
inline constexpr double lfc_pseudocount = 1e-9;

struct WelchResult {
    double t = 0;
    double df = 0;

    bool operator==(const WelchResult&) const = default;
};

/**
 * Moments of the selected and unselected cells for one sparse column, given a
 * per-cell membership byte vector. Cells absent from `cells` are zeros; they
 * add nothing to the sums and contribute mean^2 each to the squared
 * deviations.
 */
inline std::pair<GroupStats, GroupStats> group_stats_from_membership(
    std::span<const std::uint32_t> cells,
    std::span<const double> values,
    std::span<const std::uint8_t> membership,
    std::size_t n_selected)
{
    const std::size_t n_total = membership.size();
    const std::size_t n_unselected = n_total - n_selected;

    CompensatedSum sum[2];
    std::size_t nonzero[2] = {0, 0};
    double lo[2] = {0, 0}, hi[2] = {0, 0};
    for (std::size_t k = 0; k < values.size(); ++k) {
        const int group = membership[cells[k]] ? 0 : 1;
        sum[group].add(values[k]);
        lo[group] = nonzero[group] ? std::min(lo[group], values[k]) : values[k];
        hi[group] = nonzero[group] ? std::max(hi[group], values[k]) : values[k];
        ++nonzero[group];
    }

    const std::size_t n[2] = {n_selected, n_unselected};
    double mean[2];
    bool constant[2];
    for (int g = 0; g < 2; ++g) {
        if (nonzero[g] < n[g]) {
            lo[g] = std::min(lo[g], 0.0);
            hi[g] = std::max(hi[g], 0.0);
        }
        // sum / n can round away from a value every cell shares, which
        // would leave a spurious nonzero variance.
        constant[g] = lo[g] == hi[g];
        mean[g] = n[g] == 0 ? 0.0 : constant[g] ? lo[g] : std::clamp(sum[g].value() / static_cast<double>(n[g]), lo[g], hi[g]);
    }

    CompensatedSum squares[2];
    for (std::size_t k = 0; k < values.size(); ++k) {
        const int group = membership[cells[k]] ? 0 : 1;
        const double dev = values[k] - mean[group];
        squares[group].add(dev * dev);
    }

    GroupStats out[2];
    for (int g = 0; g < 2; ++g) {
        out[g].n = n[g];
        out[g].mean = mean[g];
        if (n[g] >= 2 && !constant[g]) {
            const double zeros = static_cast<double>(n[g] - nonzero[g]);
            squares[g].add(zeros * mean[g] * mean[g]);
            out[g].variance = std::max(0.0, squares[g].value() / static_cast<double>(n[g] - 1));
        }
    }
    return {out[0], out[1]};
}

/**
 * Selected and unselected group moments for one gene column.
 */
inline std::pair<GroupStats, GroupStats> compute_group_stats(const store::GeneColumnView& column, const SelectionMask& mask) {
    const auto membership = mask.membership();
    return group_stats_from_membership(column.cell_indices, column.values, membership, mask.size());
}

/**
 * Welch's unequal-variance t statistic and Welch-Satterthwaite degrees of
 * freedom. A zero standard error yields t = 0 for equal means and +/-inf
 * otherwise, with df = na + nb - 2.
 */
inline WelchResult welch_t(const GroupStats& a, const GroupStats& b) {
    if (a.n < 2 || b.n < 2) {
        throw Error(ErrorKind::GroupTooSmall, "Welch t-test needs at least 2 cells per group");
    }
    const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
    const double sa = a.variance / na, sb = b.variance / nb;
    const double se2 = sa + sb;
    const double diff = a.mean - b.mean;
    if (se2 == 0) {
        const double pooled_df = na + nb - 2;
        if (diff == 0) {
            return {0.0, pooled_df};
        }
        return {std::copysign(std::numeric_limits<double>::infinity(), diff), pooled_df};
    }
    const double t = diff / std::sqrt(se2);
    const double df = (se2 * se2) / (sa * sa / (na - 1) + sb * sb / (nb - 1));
    return {t, df};
}

/**
 * log2((mean_a + eps) / (mean_b + eps)), evaluated as a difference of logs so
 * that swapping the groups negates it exactly.
 */
inline double log_fold_change(const GroupStats& a, const GroupStats& b) {
    if (a.mean == b.mean) {
        return 0.0;
    }
    return std::log2(a.mean + lfc_pseudocount) - std::log2(b.mean + lfc_pseudocount);
}

}

#endif
