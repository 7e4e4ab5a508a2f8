#ifndef CELLSCOPE_ANNDATA_SPARSE_HPP
#define CELLSCOPE_ANNDATA_SPARSE_HPP

#include "../error.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

/**
 * @file sparse.hpp
 *
 * @brief Compressed sparse matrices and the expression-matrix adapter that
 * exposes a uniform per-cell row API over CSR, CSC and dense storage.
 */

namespace cellscope::anndata {

/**
 * Compressed sparse row matrix. Rows are the compressed dimension.
 * Values are held as 64-bit floats regardless of their on-disk width.
 */
struct SparseMatrixCSR {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::uint64_t> indptr{0};
    std::vector<std::uint32_t> indices;
    std::vector<double> values;

    std::size_t nonzero_count() const { return values.size(); }

    bool operator==(const SparseMatrixCSR&) const = default;
};

/**
 * Check the structural invariants of `m` and sort the column indices of any
 * row that is not strictly increasing. Duplicated (row, column) entries are
 * rejected because there is no unambiguous way to merge them.
 */
inline void canonicalize(SparseMatrixCSR& m) {
    if (m.indptr.size() != m.n_rows + 1) {
        throw Error(ErrorKind::InvalidData, "indptr must have n_rows + 1 entries");
    }
    if (m.indptr.front() != 0) {
        throw Error(ErrorKind::InvalidData, "indptr must start at zero");
    }
    if (m.indices.size() != m.values.size() || m.indptr.back() != m.values.size()) {
        throw Error(ErrorKind::InvalidData, "indptr, indices and values lengths disagree");
    }

    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> idx_buffer;
    std::vector<double> val_buffer;

    for (std::size_t r = 0; r < m.n_rows; ++r) {
        const auto start = m.indptr[r], end = m.indptr[r + 1];
        if (end < start) {
            throw Error(ErrorKind::InvalidData, "indptr must be non-decreasing");
        }

        bool sorted = true;
        for (auto k = start; k < end; ++k) {
            if (m.indices[k] >= m.n_cols) {
                throw Error(ErrorKind::InvalidData, "column index " + std::to_string(m.indices[k]) + " out of range in row " + std::to_string(r));
            }
            if (k > start && m.indices[k] <= m.indices[k - 1]) {
                sorted = false;
            }
        }
        if (sorted) {
            continue;
        }

        const auto len = static_cast<std::size_t>(end - start);
        order.resize(len);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return m.indices[start + a] < m.indices[start + b];
        });

        idx_buffer.resize(len);
        val_buffer.resize(len);
        for (std::size_t i = 0; i < len; ++i) {
            idx_buffer[i] = m.indices[start + order[i]];
            val_buffer[i] = m.values[start + order[i]];
        }
        for (std::size_t i = 1; i < len; ++i) {
            if (idx_buffer[i] == idx_buffer[i - 1]) {
                throw Error(ErrorKind::InvalidData, "duplicate entry in row " + std::to_string(r));
            }
        }
        std::copy(idx_buffer.begin(), idx_buffer.end(), m.indices.begin() + start);
        std::copy(val_buffer.begin(), val_buffer.end(), m.values.begin() + start);
    }
}

/**
 * Densify a single row into a vector of length `n_cols`.
 */
inline std::vector<double> get_row(const SparseMatrixCSR& m, std::size_t row) {
    if (row >= m.n_rows) {
        throw Error(ErrorKind::IndexOutOfRange, "row " + std::to_string(row) + " >= " + std::to_string(m.n_rows));
    }
    std::vector<double> out(m.n_cols, 0.0);
    for (auto k = m.indptr[row]; k < m.indptr[row + 1]; ++k) {
        out[m.indices[k]] = m.values[k];
    }
    return out;
}

/**
 * Build a canonical CSR matrix from a row-major dense buffer, dropping zeros.
 */
inline SparseMatrixCSR from_dense(std::size_t n_rows, std::size_t n_cols, const std::vector<double>& dense) {
    SparseMatrixCSR out;
    out.n_rows = n_rows;
    out.n_cols = n_cols;
    out.indptr.assign(1, 0);
    out.indptr.reserve(n_rows + 1);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            const double v = dense[r * n_cols + c];
            if (v != 0) {
                out.indices.push_back(static_cast<std::uint32_t>(c));
                out.values.push_back(v);
            }
        }
        out.indptr.push_back(out.values.size());
    }
    return out;
}

/**
 * Storage orientation of the expression matrix as found on disk.
 */
enum class MatrixLayout : std::uint8_t {
    CellMajor, ///< CSR with cells as rows.
    GeneMajor, ///< CSC with cells as rows, i.e. compressed along genes.
    Dense      ///< Row-major dense cells x genes block.
};

/**
 * Cells x genes expression matrix. Sparse inputs keep their raw arrays and an
 * orientation flag; conversion to the gene-major serving layout is the store's
 * job. Dense inputs are wrapped rather than sparsified.
 */
class ExpressionMatrix {
public:
    ExpressionMatrix() = default;

    static ExpressionMatrix cell_major(SparseMatrixCSR csr) {
        ExpressionMatrix out;
        out.layout_ = MatrixLayout::CellMajor;
        out.n_cells_ = csr.n_rows;
        out.n_genes_ = csr.n_cols;
        out.compressed_ = std::move(csr);
        return out;
    }

    /**
     * `by_gene` holds the CSC arrays read as a CSR matrix whose rows are genes.
     */
    static ExpressionMatrix gene_major(SparseMatrixCSR by_gene) {
        ExpressionMatrix out;
        out.layout_ = MatrixLayout::GeneMajor;
        out.n_cells_ = by_gene.n_cols;
        out.n_genes_ = by_gene.n_rows;
        out.compressed_ = std::move(by_gene);
        return out;
    }

    static ExpressionMatrix dense(std::size_t n_cells, std::size_t n_genes, std::vector<double> values) {
        if (values.size() != n_cells * n_genes) {
            throw Error(ErrorKind::DimensionMismatch, "dense buffer does not match its shape");
        }
        ExpressionMatrix out;
        out.layout_ = MatrixLayout::Dense;
        out.n_cells_ = n_cells;
        out.n_genes_ = n_genes;
        out.dense_ = std::move(values);
        return out;
    }

    MatrixLayout layout() const { return layout_; }
    std::size_t n_cells() const { return n_cells_; }
    std::size_t n_genes() const { return n_genes_; }

    /// Raw compressed arrays; rows are cells for CellMajor and genes for GeneMajor.
    const SparseMatrixCSR& compressed() const { return compressed_; }

    /// Row-major dense values, only populated for the Dense layout.
    const std::vector<double>& dense_values() const { return dense_; }

    std::size_t nonzero_count() const {
        if (layout_ == MatrixLayout::Dense) {
            return static_cast<std::size_t>(std::count_if(dense_.begin(), dense_.end(), [](double v) { return v != 0; }));
        }
        return compressed_.nonzero_count();
    }

    /**
     * Expression of every gene in one cell.
     */
    std::vector<double> row(std::size_t cell) const {
        if (cell >= n_cells_) {
            throw Error(ErrorKind::IndexOutOfRange, "cell " + std::to_string(cell) + " >= " + std::to_string(n_cells_));
        }
        switch (layout_) {
            case MatrixLayout::CellMajor:
                return get_row(compressed_, cell);
            case MatrixLayout::Dense:
                return std::vector<double>(dense_.begin() + cell * n_genes_, dense_.begin() + (cell + 1) * n_genes_);
            case MatrixLayout::GeneMajor: {
                std::vector<double> out(n_genes_, 0.0);
                const auto target = static_cast<std::uint32_t>(cell);
                for (std::size_t g = 0; g < n_genes_; ++g) {
                    auto first = compressed_.indices.begin() + compressed_.indptr[g];
                    auto last = compressed_.indices.begin() + compressed_.indptr[g + 1];
                    auto it = std::lower_bound(first, last, target);
                    if (it != last && *it == target) {
                        out[g] = compressed_.values[it - compressed_.indices.begin()];
                    }
                }
                return out;
            }
        }
        return {};
    }

    bool operator==(const ExpressionMatrix&) const = default;

private:
    MatrixLayout layout_ = MatrixLayout::CellMajor;
    std::size_t n_cells_ = 0;
    std::size_t n_genes_ = 0;
    SparseMatrixCSR compressed_;
    std::vector<double> dense_;
};

}

#endif
