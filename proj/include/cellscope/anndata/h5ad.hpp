#ifndef CELLSCOPE_ANNDATA_H5AD_HPP
#define CELLSCOPE_ANNDATA_H5AD_HPP

#include "../error.hpp"
#include "dataset.hpp"
#include "hdf5.hpp"
#include "sparse.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

/**
 * @file h5ad.hpp
 *
 * @brief Reader for AnnData h5ad files.
 *
 * Supported layouts, following anndata's encoding-version 0.1.0 / 0.2.0
 * conventions plus the older pre-0.7 attribute scheme:
 *
 * - `X` as a `csr_matrix` / `csc_matrix` group (or `h5sparse_format` group)
 *   with `data`, `indices`, `indptr` and a `shape` attribute, or as a 2-D
 *   dense dataset.
 * - `obs` / `var` as dataframe groups. Categorical columns are either groups
 *   with `categories` and `codes`, or integer datasets carrying a
 *   `categories` attribute (object reference or inline strings). Plain string
 *   columns are factorized. Numeric, boolean and nullable columns are not
 *   annotations and are skipped.
 * - `obsm` datasets with 2 or 3 columns become embeddings; wider ones
 *   (PCA and friends) are skipped.
 */

namespace cellscope::anndata {

namespace detail {

inline bool supported_version(const std::optional<std::string>& version) {
    return !version || *version == "0.1.0" || *version == "0.2.0";
}

inline void check_version(hid_t obj, const std::string& what) {
    auto version = h5::read_scalar_string_attribute(obj, "encoding-version");
    if (!supported_version(version)) {
        throw Error(ErrorKind::UnsupportedEncoding, what + " has unsupported encoding-version " + *version);
    }
}

inline std::optional<std::string> encoding_type(hid_t obj) {
    return h5::read_scalar_string_attribute(obj, "encoding-type");
}

inline bool is_integer_dataset(hid_t dset) {
    return h5::dataset_class(dset) == H5T_INTEGER;
}

inline std::vector<std::int64_t> read_codes(hid_t dset) {
    if (!is_integer_dataset(dset)) {
        throw Error(ErrorKind::UnsupportedEncoding, "categorical codes must be integers");
    }
    return h5::read_numeric<std::int64_t>(dset);
}

inline AnnotationColumn from_codes(std::string name, std::vector<std::string> categories, const std::vector<std::int64_t>& raw_codes) {
    AnnotationColumn out;
    out.name = std::move(name);
    out.categories = std::move(categories);
    out.codes.reserve(raw_codes.size());
    const auto n_cat = static_cast<std::int64_t>(out.categories.size());
    for (auto c : raw_codes) {
        if (c < -1 || c >= n_cat) {
            throw Error(ErrorKind::UnsupportedEncoding, "invalid code " + std::to_string(c) + " in column '" + out.name + "'");
        }
        out.codes.push_back(static_cast<std::int32_t>(c));
    }
    finalize_categorical(out);
    return out;
}

/// Legacy categorical: categories live behind an attribute on the codes dataset.
inline std::vector<std::string> legacy_categories(hid_t dset) {
    if (h5::attribute_is_reference(dset, "categories")) {
        auto target = h5::dereference_attribute(dset, "categories");
        return h5::read_strings(target.get());
    }
    return h5::read_string_attribute(dset, "categories");
}

/// Length of a dataframe's index, or nullopt when the frame has no index.
inline std::optional<std::size_t> dataframe_length(hid_t frame) {
    auto index_name = h5::read_scalar_string_attribute(frame, "_index");
    std::vector<std::string> candidates;
    if (index_name) {
        candidates.push_back(*index_name);
    }
    candidates.push_back("_index");
    candidates.push_back("index");
    for (const auto& c : candidates) {
        if (h5::node_kind(frame, c) == h5::NodeKind::Dataset) {
            auto dset = h5::open_dataset(frame, c);
            auto shape = h5::dataset_shape(dset.get());
            return shape.empty() ? 1 : static_cast<std::size_t>(shape[0]);
        }
    }
    return std::nullopt;
}

inline std::vector<std::string> dataframe_index(hid_t frame) {
    auto index_name = h5::read_scalar_string_attribute(frame, "_index").value_or("_index");
    if (h5::node_kind(frame, index_name) != h5::NodeKind::Dataset) {
        return {};
    }
    auto dset = h5::open_dataset(frame, index_name);
    if (h5::dataset_class(dset.get()) != H5T_STRING) {
        throw Error(ErrorKind::UnsupportedEncoding, "dataframe index is not a string array");
    }
    return h5::read_strings(dset.get());
}

/**
 * Column names in declared order; frames without `column-order` fall back to
 * HDF5 member order minus the index and the legacy `__categories` group.
 */
inline std::vector<std::string> dataframe_columns(hid_t frame) {
    if (h5::has_attribute(frame, "column-order")) {
        return h5::read_string_attribute(frame, "column-order");
    }
    auto index_name = h5::read_scalar_string_attribute(frame, "_index").value_or("_index");
    std::vector<std::string> out;
    for (auto& name : h5::child_names(frame)) {
        if (name != index_name && name != "__categories") {
            out.push_back(std::move(name));
        }
    }
    return out;
}

}

/**
 * True when `parent/name` is encoded in a way `parse_categorical` accepts.
 */
inline bool is_categorical_like(hid_t parent, const std::string& name) {
    switch (h5::node_kind(parent, name)) {
        case h5::NodeKind::Group: {
            auto group = h5::open_group(parent, name);
            return detail::encoding_type(group.get()) == std::optional<std::string>("categorical");
        }
        case h5::NodeKind::Dataset: {
            auto dset = h5::open_dataset(parent, name);
            if (h5::dataset_shape(dset.get()).size() != 1) {
                return false;
            }
            const auto cls = h5::dataset_class(dset.get());
            if (cls == H5T_STRING) {
                return true;
            }
            return cls == H5T_INTEGER && h5::has_attribute(dset.get(), "categories");
        }
        default:
            return false;
    }
}

/**
 * Parse one obs column `parent/name` into an annotation. Accepts the modern
 * categorical group, the legacy codes-with-categories-attribute dataset, and
 * plain string arrays (factorized in first-appearance order).
 */
inline AnnotationColumn parse_categorical(hid_t parent, const std::string& name) {
    switch (h5::node_kind(parent, name)) {
        case h5::NodeKind::Group: {
            auto group = h5::open_group(parent, name);
            if (detail::encoding_type(group.get()) != std::optional<std::string>("categorical")) {
                throw Error(ErrorKind::UnsupportedEncoding, "column '" + name + "' is a group but not categorical");
            }
            detail::check_version(group.get(), "column '" + name + "'");
            if (h5::node_kind(group.get(), "categories") != h5::NodeKind::Dataset || h5::node_kind(group.get(), "codes") != h5::NodeKind::Dataset) {
                throw Error(ErrorKind::UnsupportedEncoding, "categorical column '" + name + "' lacks categories or codes");
            }
            auto cats = h5::open_dataset(group.get(), "categories");
            auto codes = h5::open_dataset(group.get(), "codes");
            if (h5::dataset_class(cats.get()) != H5T_STRING) {
                throw Error(ErrorKind::UnsupportedEncoding, "categorical column '" + name + "' has non-string categories");
            }
            return detail::from_codes(name, h5::read_strings(cats.get()), detail::read_codes(codes.get()));
        }
        case h5::NodeKind::Dataset: {
            auto dset = h5::open_dataset(parent, name);
            const auto cls = h5::dataset_class(dset.get());
            if (cls == H5T_STRING) {
                return factorize(name, h5::read_strings(dset.get()));
            }
            if (cls == H5T_INTEGER && h5::has_attribute(dset.get(), "categories")) {
                return detail::from_codes(name, detail::legacy_categories(dset.get()), detail::read_codes(dset.get()));
            }
            throw Error(ErrorKind::UnsupportedEncoding, "column '" + name + "' is not categorical");
        }
        default:
            throw Error(ErrorKind::UnsupportedEncoding, "column '" + name + "' not found");
    }
}

namespace detail {

inline ExpressionMatrix read_sparse_x(hid_t x) {
    auto type = encoding_type(x);
    auto legacy = h5::read_scalar_string_attribute(x, "h5sparse_format");

    bool by_cell;
    if (type == std::optional<std::string>("csr_matrix") || (!type && legacy == std::optional<std::string>("csr"))) {
        by_cell = true;
    } else if (type == std::optional<std::string>("csc_matrix") || (!type && legacy == std::optional<std::string>("csc"))) {
        by_cell = false;
    } else {
        throw Error(ErrorKind::UnsupportedEncoding, "X group has unknown encoding " + type.value_or(legacy.value_or("<none>")));
    }
    check_version(x, "X");

    std::vector<std::int64_t> shape;
    if (h5::has_attribute(x, "shape")) {
        shape = h5::read_integer_attribute(x, "shape");
    } else if (h5::has_attribute(x, "h5sparse_shape")) {
        shape = h5::read_integer_attribute(x, "h5sparse_shape");
    }
    if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0) {
        throw Error(ErrorKind::UnsupportedEncoding, "X group lacks a valid 2-element shape");
    }
    for (const char* part : {"data", "indices", "indptr"}) {
        if (h5::node_kind(x, part) != h5::NodeKind::Dataset) {
            throw Error(ErrorKind::UnsupportedEncoding, std::string("X group lacks ") + part);
        }
    }

    const auto n_cells = static_cast<std::size_t>(shape[0]);
    const auto n_genes = static_cast<std::size_t>(shape[1]);

    SparseMatrixCSR m;
    m.n_rows = by_cell ? n_cells : n_genes;
    m.n_cols = by_cell ? n_genes : n_cells;
    {
        auto d = h5::open_dataset(x, "data");
        m.values = h5::read_numeric<double>(d.get());
    }
    {
        auto d = h5::open_dataset(x, "indices");
        auto raw = h5::read_numeric<std::int64_t>(d.get());
        m.indices.resize(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] < 0 || static_cast<std::size_t>(raw[i]) >= m.n_cols) {
                throw Error(ErrorKind::InvalidData, "X index " + std::to_string(raw[i]) + " out of range");
            }
            m.indices[i] = static_cast<std::uint32_t>(raw[i]);
        }
    }
    {
        auto d = h5::open_dataset(x, "indptr");
        auto raw = h5::read_numeric<std::int64_t>(d.get());
        if (raw.size() != m.n_rows + 1) {
            throw Error(ErrorKind::DimensionMismatch, "X indptr has " + std::to_string(raw.size()) + " entries, expected " + std::to_string(m.n_rows + 1));
        }
        m.indptr.resize(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] < 0) {
                throw Error(ErrorKind::InvalidData, "negative X indptr");
            }
            m.indptr[i] = static_cast<std::uint64_t>(raw[i]);
        }
    }
    canonicalize(m);
    return by_cell ? ExpressionMatrix::cell_major(std::move(m)) : ExpressionMatrix::gene_major(std::move(m));
}

inline ExpressionMatrix read_x(hid_t file) {
    switch (h5::node_kind(file, "X")) {
        case h5::NodeKind::Group: {
            auto x = h5::open_group(file, "X");
            return read_sparse_x(x.get());
        }
        case h5::NodeKind::Dataset: {
            auto x = h5::open_dataset(file, "X");
            auto shape = h5::dataset_shape(x.get());
            if (shape.size() != 2) {
                throw Error(ErrorKind::UnsupportedEncoding, "dense X must be 2-dimensional");
            }
            check_version(x.get(), "X");
            return ExpressionMatrix::dense(shape[0], shape[1], h5::read_numeric<double>(x.get()));
        }
        case h5::NodeKind::Missing:
            throw Error(ErrorKind::NotAnnData, "file has no X");
        default:
            throw Error(ErrorKind::UnsupportedEncoding, "X is neither a group nor a dataset");
    }
}

/**
 * Gene labels: `var/feature_name` when present (CellxGene keeps Ensembl IDs in
 * the index and symbols there), otherwise the var index.
 */
inline std::vector<std::string> read_gene_names(hid_t file, std::size_t n_genes) {
    if (h5::node_kind(file, "var") != h5::NodeKind::Group) {
        std::vector<std::string> out;
        for (std::size_t g = 0; g < n_genes; ++g) {
            out.push_back("gene_" + std::to_string(g));
        }
        return out;
    }
    auto var = h5::open_group(file, "var");
    std::vector<std::string> names;
    if (is_categorical_like(var.get(), "feature_name")) {
        auto col = parse_categorical(var.get(), "feature_name");
        names.reserve(col.codes.size());
        for (auto c : col.codes) {
            names.push_back(col.categories[static_cast<std::size_t>(c)]);
        }
    } else {
        names = dataframe_index(var.get());
        if (names.empty()) {
            auto len = dataframe_length(var.get());
            if (len && *len != n_genes) {
                throw Error(ErrorKind::DimensionMismatch, "var has " + std::to_string(*len) + " rows, X has " + std::to_string(n_genes) + " genes");
            }
            for (std::size_t g = 0; g < n_genes; ++g) {
                names.push_back("gene_" + std::to_string(g));
            }
        }
    }
    if (names.size() != n_genes) {
        throw Error(ErrorKind::DimensionMismatch, "var has " + std::to_string(names.size()) + " rows, X has " + std::to_string(n_genes) + " genes");
    }
    return deduplicate_names(names);
}

inline std::vector<Embedding> read_embeddings(hid_t file, std::size_t n_cells) {
    std::vector<Embedding> out;
    if (h5::node_kind(file, "obsm") != h5::NodeKind::Group) {
        return out;
    }
    auto obsm = h5::open_group(file, "obsm");
    for (const auto& name : h5::child_names(obsm.get())) {
        if (h5::node_kind(obsm.get(), name) != h5::NodeKind::Dataset) {
            continue;
        }
        auto dset = h5::open_dataset(obsm.get(), name);
        auto shape = h5::dataset_shape(dset.get());
        const auto cls = h5::dataset_class(dset.get());
        if (shape.size() != 2 || (cls != H5T_FLOAT && cls != H5T_INTEGER)) {
            continue;
        }
        if (shape[0] != n_cells) {
            throw Error(ErrorKind::DimensionMismatch, "obsm/" + name + " has " + std::to_string(shape[0]) + " rows, obs has " + std::to_string(n_cells));
        }
        if (shape[1] != 2 && shape[1] != 3) {
            continue;
        }
        Embedding e;
        e.name = name;
        e.dims = static_cast<std::uint32_t>(shape[1]);
        e.coords = h5::read_numeric<float>(dset.get());
        for (std::size_t i = 0; i < e.coords.size(); ++i) {
            if (!std::isfinite(e.coords[i])) {
                throw Error(ErrorKind::InvalidData, "obsm/" + name + " row " + std::to_string(i / e.dims) + " has a non-finite coordinate");
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

}

/**
 * Parse an h5ad file into a validated, canonical in-memory dataset. The
 * expression matrix stays sparse when stored sparse.
 */
inline RawDataset open_and_parse(const std::filesystem::path& path) {
    h5::silence_errors();

    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorKind::FileNotReadable, path.string() + " is not a readable file");
    }
    if (H5Fis_hdf5(path.c_str()) <= 0) {
        throw Error(ErrorKind::FileNotReadable, path.string() + " is not an HDF5 file");
    }
    h5::Handle file(H5Fopen(path.c_str(), H5F_ACC_RDONLY, H5P_DEFAULT));
    if (!file) {
        throw Error(ErrorKind::FileNotReadable, "cannot open " + path.string());
    }

    const auto obs_kind = h5::node_kind(file.get(), "obs");
    if (obs_kind == h5::NodeKind::Missing) {
        throw Error(ErrorKind::NotAnnData, "file has no obs");
    }
    if (h5::node_kind(file.get(), "X") == h5::NodeKind::Missing) {
        throw Error(ErrorKind::NotAnnData, "file has no X");
    }
    if (obs_kind != h5::NodeKind::Group) {
        throw Error(ErrorKind::UnsupportedEncoding, "obs stored as a compound dataset is not supported");
    }

    RawDataset ds;
    ds.matrix = detail::read_x(file.get());
    ds.cell_count = ds.matrix.n_cells();

    {
        auto obs = h5::open_group(file.get(), "obs");
        detail::check_version(obs.get(), "obs");
        auto len = detail::dataframe_length(obs.get());
        if (len && *len != ds.cell_count) {
            throw Error(ErrorKind::DimensionMismatch, "obs has " + std::to_string(*len) + " rows, X has " + std::to_string(ds.cell_count) + " cells");
        }
        for (const auto& column : detail::dataframe_columns(obs.get())) {
            if (!is_categorical_like(obs.get(), column)) {
                continue;
            }
            auto col = parse_categorical(obs.get(), column);
            if (col.codes.size() != ds.cell_count) {
                throw Error(ErrorKind::DimensionMismatch, "obs/" + column + " has " + std::to_string(col.codes.size()) + " rows, X has " + std::to_string(ds.cell_count) + " cells");
            }
            ds.annotations.push_back(std::move(col));
        }
    }

    ds.embeddings = detail::read_embeddings(file.get(), ds.cell_count);
    ds.gene_names = detail::read_gene_names(file.get(), ds.matrix.n_genes());
    validate(ds);
    return ds;
}

}

#endif
