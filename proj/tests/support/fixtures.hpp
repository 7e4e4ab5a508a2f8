#ifndef CELLSCOPE_TESTS_FIXTURES_HPP
#define CELLSCOPE_TESTS_FIXTURES_HPP

// h5ad files for end-to-end tests, written with the HDF5 C API.

#include "h5ad_writer.hpp"
#include "synthetic.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cellscope_test {

/// Write a row-major dense matrix as float32 CSR; returns the values as stored.
inline std::vector<double> write_csr(H5adWriter& w, std::size_t cells, std::size_t genes, const std::vector<double>& dense) {
    std::vector<std::int64_t> indptr{0};
    std::vector<std::int32_t> indices;
    std::vector<float> data;
    std::vector<double> stored(dense.size(), 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t g = 0; g < genes; ++g) {
            const auto v = static_cast<float>(dense[c * genes + g]);
            if (v != 0) {
                indices.push_back(static_cast<std::int32_t>(g));
                data.push_back(v);
                stored[c * genes + g] = v;
            }
        }
        indptr.push_back(static_cast<std::int64_t>(data.size()));
    }
    w.csr(static_cast<std::int64_t>(cells), static_cast<std::int64_t>(genes), indptr, indices, data);
    return stored;
}

inline std::vector<std::string> cell_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < n; ++c) {
        out.push_back("cell" + std::to_string(c));
    }
    return out;
}

/**
 * The enriched fixture (gene 7 high in cluster A) as an h5ad file with a
 * "cluster" annotation and a 3-D X_umap. Returns the matrix as stored.
 */
inline std::vector<double> write_enriched_h5ad(const std::filesystem::path& path) {
    H5adWriter w(path);
    const auto stored = write_csr(w, enriched_cells, enriched_genes, enriched_dense());
    w.index("obs", cell_names(enriched_cells));
    std::vector<std::int32_t> codes;
    for (std::size_t c = 0; c < enriched_cells; ++c) {
        codes.push_back(c < enriched_cluster_size ? 0 : 1);
    }
    w.categorical("obs", "cluster", {"A", "B"}, codes);
    w.index("var", gene_names(enriched_genes));
    w.obsm("X_umap", enriched_cells, 3, enriched_embedding());
    return stored;
}

/// Four cells, one gene "RAMP" holding [0, 1, 2, 4], and a 2-D embedding.
inline void write_ramp_h5ad(const std::filesystem::path& path) {
    H5adWriter w(path);
    write_csr(w, 4, 2, {0, 1, 1, 0, 2, 0, 4, 3});
    w.index("obs", cell_names(4));
    w.categorical("obs", "kind", {"x", "y"}, {0, 0, 1, 1});
    w.index("var", {"RAMP", "Other"});
    w.obsm("X_tsne", 4, 2, {0, 0, 1, 0, 0, 1, 1, 1});
}

}

#endif
