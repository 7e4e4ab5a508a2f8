#ifndef CELLSCOPE_STORE_BUILD_HPP
#define CELLSCOPE_STORE_BUILD_HPP

#include "../anndata/dataset.hpp"
#include "../error.hpp"
#include "../stats/types.hpp"
#include "format.hpp"
#include "gene_index.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

/**
 * @file build.hpp
 *
 * @brief Conversion of a parsed dataset into the gene-major store file.
 */

namespace cellscope::store {

struct BuildOptions {
    /// Cap on the transpose workspace (gene-major index and value arrays).
    std::uint64_t max_workspace_bytes = 16ull << 30;
};

/**
 * Gene-major copy of the expression matrix: `colptr` delimits each gene's
 * run of (cell, value) pairs, with cells strictly increasing within a run.
 */
struct GeneMajorMatrix {
    std::size_t n_cells = 0;
    std::size_t n_genes = 0;
    std::vector<std::uint64_t> colptr;
    std::vector<std::uint32_t> cells;
    std::vector<double> values;
};

inline std::uint64_t transpose_workspace_bytes(std::size_t n_genes, std::size_t nnz) {
    return static_cast<std::uint64_t>(nnz) * (sizeof(std::uint32_t) + sizeof(double)) + static_cast<std::uint64_t>(n_genes + 1) * sizeof(std::uint64_t) * 2;
}

/**
 * Transpose any expression layout into gene-major form. Cell-major input is
 * converted with one counting-sort pass over the nonzeros; visiting cells in
 * order leaves every gene's cell list sorted.
 */
inline GeneMajorMatrix to_gene_major(const anndata::ExpressionMatrix& m, const BuildOptions& options = {}) {
    GeneMajorMatrix out;
    out.n_cells = m.n_cells();
    out.n_genes = m.n_genes();
    if (m.n_cells() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorKind::OutOfMemoryBudget, "cell count exceeds 32-bit cell indices");
    }

    const auto nnz = m.nonzero_count();
    const auto workspace = transpose_workspace_bytes(m.n_genes(), nnz);
    if (workspace > options.max_workspace_bytes) {
        throw Error(ErrorKind::OutOfMemoryBudget, "transpose needs " + std::to_string(workspace) + " bytes, cap is " + std::to_string(options.max_workspace_bytes));
    }

    switch (m.layout()) {
        case anndata::MatrixLayout::GeneMajor: {
            const auto& c = m.compressed();
            out.colptr = c.indptr;
            out.cells = c.indices;
            out.values = c.values;
            break;
        }
        case anndata::MatrixLayout::CellMajor: {
            const auto& c = m.compressed();
            out.colptr.assign(out.n_genes + 1, 0);
            for (auto g : c.indices) {
                ++out.colptr[g + 1];
            }
            for (std::size_t g = 0; g < out.n_genes; ++g) {
                out.colptr[g + 1] += out.colptr[g];
            }
            std::vector<std::uint64_t> cursor(out.colptr.begin(), out.colptr.end() - 1);
            out.cells.resize(nnz);
            out.values.resize(nnz);
            for (std::size_t cell = 0; cell < out.n_cells; ++cell) {
                for (auto k = c.indptr[cell]; k < c.indptr[cell + 1]; ++k) {
                    const auto dest = cursor[c.indices[k]]++;
                    out.cells[dest] = static_cast<std::uint32_t>(cell);
                    out.values[dest] = c.values[k];
                }
            }
            break;
        }
        case anndata::MatrixLayout::Dense: {
            const auto& d = m.dense_values();
            out.colptr.assign(1, 0);
            out.colptr.reserve(out.n_genes + 1);
            out.cells.reserve(nnz);
            out.values.reserve(nnz);
            for (std::size_t g = 0; g < out.n_genes; ++g) {
                for (std::size_t cell = 0; cell < out.n_cells; ++cell) {
                    const double v = d[cell * out.n_genes + g];
                    if (v != 0) {
                        out.cells.push_back(static_cast<std::uint32_t>(cell));
                        out.values.push_back(v);
                    }
                }
                out.colptr.push_back(out.cells.size());
            }
            break;
        }
    }
    return out;
}

/**
 * Index of the embedding served by default: the first 3-D one, else the
 * first one, else none.
 */
inline std::uint32_t default_embedding_index(const std::vector<anndata::Embedding>& embeddings) {
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (embeddings[i].dims == 3) {
            return static_cast<std::uint32_t>(i);
        }
    }
    return embeddings.empty() ? no_default_embedding : 0u;
}

namespace detail {

inline void write_gene_index(SectionWriter& w, const std::vector<std::string>& names) {
    w.put(static_cast<std::uint64_t>(names.size()));
    for (const auto& n : names) {
        w.put_string(n);
    }
    w.pad_to(4);
    const auto order = sorted_gene_order(names);
    w.put_array(std::span<const std::uint32_t>(order));
}

inline void write_expression(SectionWriter& w, const GeneMajorMatrix& m) {
    w.put(static_cast<std::uint64_t>(m.values.size()));
    w.put_array(std::span<const std::uint64_t>(m.colptr));
    std::vector<double> maxima(m.n_genes, 0.0);
    for (std::size_t g = 0; g < m.n_genes; ++g) {
        for (auto k = m.colptr[g]; k < m.colptr[g + 1]; ++k) {
            if (k == m.colptr[g] || m.values[k] > maxima[g]) {
                maxima[g] = m.values[k];
            }
        }
    }
    w.put_array(std::span<const double>(maxima));
    w.put_array(std::span<const std::uint32_t>(m.cells));
    w.pad_to(8);
    w.put_array(std::span<const double>(m.values));
}

inline void write_annotations(SectionWriter& w, const std::vector<anndata::AnnotationColumn>& annotations) {
    w.put(static_cast<std::uint32_t>(annotations.size()));
    for (const auto& a : annotations) {
        w.put_string(a.name);
        w.put(static_cast<std::uint32_t>(a.categories.size()));
        for (const auto& c : a.categories) {
            w.put_string(c);
        }
        w.pad_to(8);
        w.put(static_cast<std::uint64_t>(a.codes.size()));
        w.put_array(std::span<const std::int32_t>(a.codes));
    }
}

inline void write_embeddings(SectionWriter& w, const std::vector<anndata::Embedding>& embeddings, std::size_t n_cells) {
    w.put(static_cast<std::uint32_t>(embeddings.size()));
    w.put(default_embedding_index(embeddings));
    std::vector<float> xyz;
    for (const auto& e : embeddings) {
        w.put_string(e.name);
        w.put(e.dims);
        w.put(static_cast<std::uint32_t>(e.dims == 2 ? 1 : 0));
        w.pad_to(8);
        w.put(static_cast<std::uint64_t>(n_cells));
        xyz.assign(n_cells * 3, 0.0f);
        for (std::size_t i = 0; i < n_cells; ++i) {
            for (std::uint32_t d = 0; d < e.dims; ++d) {
                xyz[i * 3 + d] = e.coords[i * e.dims + d];
            }
        }
        w.put_array(std::span<const float>(xyz));
    }
}

}

/**
 * Serialize precomputed marker tables in the marker-section layout.
 */
inline void write_markers(SectionWriter& w, const stats::MarkerCollection& markers) {
    w.put(static_cast<std::uint32_t>(markers.size()));
    for (const auto& e : markers) {
        w.put_string(e.annotation);
        w.put_string(e.category);
        w.put(static_cast<std::uint8_t>(e.skipped ? 1 : 0));
        w.put_string(e.reason);
        w.put(static_cast<std::uint32_t>(e.table.records.size()));
        for (const auto& r : e.table.records) {
            w.put(r.gene_index);
            w.put(r.t);
            w.put(r.df);
            w.put(r.p_value);
            w.put(r.log_fold_change);
        }
    }
}

namespace detail {

/// Write to a sibling temporary and rename over `dest` once complete.
template<class Body>
void write_atomically(const std::filesystem::path& dest, Body&& body) {
    auto tmp = dest;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::IoFailure, "cannot open " + tmp.string() + " for writing");
        }
        try {
            body(out);
            out.flush();
            if (!out) {
                throw Error(ErrorKind::IoFailure, "write to " + tmp.string() + " failed");
            }
        } catch (...) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw;
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, dest, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::IoFailure, "cannot move store into place at " + dest.string());
    }
}

inline void finish_header(std::ofstream& out, const StoreHeader& header) {
    const auto bytes = encode_header(header);
    out.seekp(0);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot write store header");
    }
}

}

/**
 * Write the complete store for `raw` to `dest`. The output depends only on
 * the dataset contents, so identical inputs give byte-identical files.
 */
inline StoreHeader build_store(const anndata::RawDataset& raw, const std::filesystem::path& dest, const BuildOptions& options = {}) {
    anndata::validate(raw);
    const auto columns = to_gene_major(raw.matrix, options);

    StoreHeader header;
    header.n_cells = raw.cell_count;
    header.n_genes = raw.gene_names.size();

    detail::write_atomically(dest, [&](std::ofstream& out) {
        SectionWriter w(out);
        w.skip_header();

        w.begin(header.section(SectionId::GeneIndex));
        detail::write_gene_index(w, raw.gene_names);
        w.end(header.section(SectionId::GeneIndex));

        w.begin(header.section(SectionId::Expression));
        detail::write_expression(w, columns);
        w.end(header.section(SectionId::Expression));

        w.begin(header.section(SectionId::Annotations));
        detail::write_annotations(w, raw.annotations);
        w.end(header.section(SectionId::Annotations));

        w.begin(header.section(SectionId::Embeddings));
        detail::write_embeddings(w, raw.embeddings, raw.cell_count);
        w.end(header.section(SectionId::Embeddings));

        w.begin(header.section(SectionId::Markers));
        w.end(header.section(SectionId::Markers));

        detail::finish_header(out, header);
    });
    return header;
}

}

#endif
