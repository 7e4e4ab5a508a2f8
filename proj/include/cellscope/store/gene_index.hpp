#ifndef CELLSCOPE_STORE_GENE_INDEX_HPP
#define CELLSCOPE_STORE_GENE_INDEX_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace cellscope::store {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

/**
 * Gene indices ordered by lower-cased name, then exact name, then index.
 * This is the search order used for prefix lookups.
 */
inline std::vector<std::uint32_t> sorted_gene_order(const std::vector<std::string>& names) {
    std::vector<std::string> lowered;
    lowered.reserve(names.size());
    for (const auto& n : names) {
        lowered.push_back(ascii_lower(n));
    }
    std::vector<std::uint32_t> order(names.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (lowered[a] != lowered[b]) {
            return lowered[a] < lowered[b];
        }
        if (names[a] != names[b]) {
            return names[a] < names[b];
        }
        return a < b;
    });
    return order;
}

struct GeneHit {
    std::uint32_t gene_index;
    std::string gene_name;

    bool operator==(const GeneHit&) const = default;
};

/// Upper bound on the number of hits returned by a gene search.
inline constexpr std::size_t max_gene_hits = 20;

/**
 * Case-insensitive search over the sorted order: exact matches first, then
 * prefix matches, each group in search order, capped at `limit`.
 */
inline std::vector<GeneHit> search_genes(
    const std::vector<std::string>& names,
    const std::vector<std::string>& lowered_sorted,
    const std::vector<std::uint32_t>& order,
    std::string_view query,
    std::size_t limit = max_gene_hits)
{
    // Names equal to the query sort before names that merely start with it.
    const auto q = ascii_lower(query);
    std::vector<GeneHit> out;
    auto it = std::lower_bound(lowered_sorted.begin(), lowered_sorted.end(), q);
    for (; it != lowered_sorted.end() && out.size() < limit && it->compare(0, q.size(), q) == 0; ++it) {
        const auto g = order[static_cast<std::size_t>(it - lowered_sorted.begin())];
        out.push_back({g, names[g]});
    }
    return out;
}

}

#endif
