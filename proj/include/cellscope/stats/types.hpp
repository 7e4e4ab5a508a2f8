#ifndef CELLSCOPE_STATS_TYPES_HPP
#define CELLSCOPE_STATS_TYPES_HPP

#include "../error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace cellscope::stats {

/**
 * Sample moments of one group of cells. `variance` uses the n - 1
 * denominator and is meaningless (reported as 0) when n < 2.
 */
struct GroupStats {
    std::size_t n = 0;
    double mean = 0;
    double variance = 0;

    bool variance_defined() const { return n >= 2; }

    bool operator==(const GroupStats&) const = default;
};

struct MarkerRecord {
    std::uint32_t gene_index = 0;
    std::string gene_name;
    double t = 0;
    double df = 0;
    double p_value = 1;
    double log_fold_change = 0; ///< base 2

    bool operator==(const MarkerRecord&) const = default;
};

/**
 * At most ten records ordered by p-value, then |log fold change| descending,
 * then gene index.
 */
struct MarkerTable {
    std::string group_label;
    std::vector<MarkerRecord> records;

    bool operator==(const MarkerTable&) const = default;
};

/// Maximum number of records kept in a marker table.
inline constexpr std::size_t marker_table_size = 10;

/**
 * Total order used to rank marker records.
 */
inline bool ranks_before(const MarkerRecord& a, const MarkerRecord& b) {
    if (a.p_value != b.p_value) {
        return a.p_value < b.p_value;
    }
    const double la = std::abs(a.log_fold_change), lb = std::abs(b.log_fold_change);
    if (la != lb) {
        return la > lb;
    }
    return a.gene_index < b.gene_index;
}

/**
 * Immutable set of selected cells; the unselected group is the complement.
 */
class SelectionMask {
public:
    SelectionMask() = default;

    /// Sorts and de-duplicates `indices`; every index must be below `n_cells`.
    SelectionMask(std::vector<std::uint32_t> indices, std::size_t n_cells) : selected_(std::move(indices)), n_cells_(n_cells) {
        std::sort(selected_.begin(), selected_.end());
        selected_.erase(std::unique(selected_.begin(), selected_.end()), selected_.end());
        if (!selected_.empty() && selected_.back() >= n_cells_) {
            throw Error(ErrorKind::IndexOutOfRange, "cell " + std::to_string(selected_.back()) + " >= " + std::to_string(n_cells_));
        }
    }

    const std::vector<std::uint32_t>& selected() const { return selected_; }
    std::size_t n_cells() const { return n_cells_; }
    std::size_t size() const { return selected_.size(); }
    std::size_t complement_size() const { return n_cells_ - selected_.size(); }
    bool empty() const { return selected_.empty(); }

    bool contains(std::uint32_t cell) const { return std::binary_search(selected_.begin(), selected_.end(), cell); }

    /// One byte per cell, 1 when selected.
    std::vector<std::uint8_t> membership() const {
        std::vector<std::uint8_t> out(n_cells_, 0);
        for (auto c : selected_) {
            out[c] = 1;
        }
        return out;
    }

    bool operator==(const SelectionMask&) const = default;

private:
    std::vector<std::uint32_t> selected_;
    std::size_t n_cells_ = 0;
};

/**
 * Precomputed markers for one category of one annotation. Skipped entries
 * carry a reason and no records.
 */
struct MarkerEntry {
    std::string annotation;
    std::string category;
    bool skipped = false;
    std::string reason;
    MarkerTable table;

    bool operator==(const MarkerEntry&) const = default;
};

using MarkerCollection = std::vector<MarkerEntry>;

}

#endif
