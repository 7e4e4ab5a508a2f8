#ifndef CELLSCOPE_ANNDATA_DATASET_HPP
#define CELLSCOPE_ANNDATA_DATASET_HPP

#include "../error.hpp"
#include "sparse.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cellscope::anndata {

/// Label given to the implicit category collecting cells with a missing code.
inline constexpr const char* missing_category = "NA";

/**
 * Categorical per-cell annotation. After parsing, missing codes have been
 * folded into a trailing "NA" category so every code is a valid index.
 */
struct AnnotationColumn {
    std::string name;
    std::vector<std::string> categories;
    std::vector<std::int32_t> codes;

    bool operator==(const AnnotationColumn&) const = default;
};

/**
 * Reduced-dimension coordinates, `dims` values per cell, row-major.
 */
struct Embedding {
    std::string name;
    std::uint32_t dims = 3;
    std::vector<float> coords;

    std::size_t n_cells() const { return dims == 0 ? 0 : coords.size() / dims; }

    bool operator==(const Embedding&) const = default;
};

struct RawDataset {
    ExpressionMatrix matrix;
    std::vector<AnnotationColumn> annotations;
    std::vector<Embedding> embeddings;
    std::vector<std::string> gene_names;
    std::size_t cell_count = 0;

    bool operator==(const RawDataset&) const = default;
};

/**
 * Factorize string values: unique values in first-appearance order become the
 * categories.
 */
inline AnnotationColumn factorize(std::string name, const std::vector<std::string>& values) {
    AnnotationColumn out;
    out.name = std::move(name);
    out.codes.reserve(values.size());
    std::unordered_map<std::string, std::int32_t> seen;
    for (const auto& v : values) {
        auto [it, inserted] = seen.try_emplace(v, static_cast<std::int32_t>(out.categories.size()));
        if (inserted) {
            out.categories.push_back(v);
        }
        out.codes.push_back(it->second);
    }
    return out;
}

/**
 * Validate codes against categories and fold -1 codes into a trailing "NA"
 * category. Any other negative code, or a code past the category list, is an
 * encoding error.
 */
inline void finalize_categorical(AnnotationColumn& col) {
    std::unordered_set<std::string> unique(col.categories.begin(), col.categories.end());
    if (unique.size() != col.categories.size()) {
        throw Error(ErrorKind::UnsupportedEncoding, "duplicate categories in column '" + col.name + "'");
    }

    const auto n_cat = static_cast<std::int32_t>(col.categories.size());
    bool has_missing = false;
    for (auto c : col.codes) {
        if (c == -1) {
            has_missing = true;
        } else if (c < 0 || c >= n_cat) {
            throw Error(ErrorKind::UnsupportedEncoding, "invalid code " + std::to_string(c) + " in column '" + col.name + "'");
        }
    }
    if (!has_missing) {
        return;
    }

    std::string label = missing_category;
    while (unique.count(label)) {
        label += "_";
    }
    col.categories.push_back(label);
    for (auto& c : col.codes) {
        if (c == -1) {
            c = n_cat;
        }
    }
}

/**
 * Disambiguate repeated names by appending "#k", where k counts earlier
 * occurrences of the same name. A generated name that collides with an
 * existing one keeps incrementing k.
 */
inline std::vector<std::string> deduplicate_names(const std::vector<std::string>& names) {
    std::unordered_set<std::string> taken(names.begin(), names.end());
    std::unordered_map<std::string, std::size_t> occurrences;
    std::unordered_set<std::string> emitted;
    std::vector<std::string> out;
    out.reserve(names.size());

    for (const auto& n : names) {
        if (emitted.insert(n).second) {
            out.push_back(n);
            continue;
        }
        auto& k = occurrences[n];
        std::string candidate;
        do {
            ++k;
            candidate = n + "#" + std::to_string(k);
        } while (taken.count(candidate) || emitted.count(candidate));
        emitted.insert(candidate);
        out.push_back(std::move(candidate));
    }
    return out;
}

/**
 * Enforce the cross-field invariants of a dataset.
 */
inline void validate(const RawDataset& ds) {
    if (ds.matrix.n_cells() != ds.cell_count) {
        throw Error(ErrorKind::DimensionMismatch, "matrix has " + std::to_string(ds.matrix.n_cells()) + " cells, obs has " + std::to_string(ds.cell_count));
    }
    if (ds.matrix.n_genes() != ds.gene_names.size()) {
        throw Error(ErrorKind::DimensionMismatch, "matrix has " + std::to_string(ds.matrix.n_genes()) + " genes, var has " + std::to_string(ds.gene_names.size()));
    }
    std::unordered_set<std::string> genes(ds.gene_names.begin(), ds.gene_names.end());
    if (genes.size() != ds.gene_names.size()) {
        throw Error(ErrorKind::InvalidData, "gene names are not unique");
    }
    for (const auto& a : ds.annotations) {
        if (a.codes.size() != ds.cell_count) {
            throw Error(ErrorKind::DimensionMismatch, "annotation '" + a.name + "' has " + std::to_string(a.codes.size()) + " entries");
        }
        for (auto c : a.codes) {
            if (c < 0 || static_cast<std::size_t>(c) >= a.categories.size()) {
                throw Error(ErrorKind::UnsupportedEncoding, "invalid code in annotation '" + a.name + "'");
            }
        }
    }
    for (const auto& e : ds.embeddings) {
        if (e.dims != 2 && e.dims != 3) {
            throw Error(ErrorKind::UnsupportedEncoding, "embedding '" + e.name + "' must have 2 or 3 dimensions");
        }
        if (e.coords.size() != ds.cell_count * e.dims) {
            throw Error(ErrorKind::DimensionMismatch, "embedding '" + e.name + "' has " + std::to_string(e.n_cells()) + " rows");
        }
        for (auto v : e.coords) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::InvalidData, "embedding '" + e.name + "' contains non-finite coordinates");
            }
        }
    }
    if (ds.matrix.layout() != MatrixLayout::Dense) {
        const auto& m = ds.matrix.compressed();
        for (auto v : m.values) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::InvalidData, "expression matrix contains non-finite values");
            }
        }
    }
}

}

#endif
