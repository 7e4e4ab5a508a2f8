#ifndef CELLSCOPE_STORE_STORE_HPP
#define CELLSCOPE_STORE_STORE_HPP

#include "../anndata/dataset.hpp"
#include "../error.hpp"
#include "../stats/types.hpp"
#include "build.hpp"
#include "format.hpp"
#include "gene_index.hpp"
#include "mapped_file.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * @file store.hpp
 *
 * @brief Read-only access to a store file. Opening verifies the header and
 * every section checksum; afterwards the store is immutable and safe to share
 * between threads.
 */

namespace cellscope::store {

/**
 * Zero-copy view of one gene's stored column.
 */
struct GeneColumnView {
    std::uint32_t gene_index = 0;
    std::span<const std::uint32_t> cell_indices;
    std::span<const double> values;
    double max_value = 0;

    std::size_t nonzero_count() const { return values.size(); }
};

struct DenseGeneColumn {
    std::vector<double> values;
    double max_value = 0;
    std::size_t nonzero_count = 0;
};

/**
 * Embedding as served: always three components per cell. `source_dims` is 2
 * when the z column was padded with zeros.
 */
struct StoredEmbedding {
    std::string name;
    std::uint32_t source_dims = 3;
    std::span<const float> xyz;

    /// Coordinates in their original dimensionality.
    anndata::Embedding original() const {
        anndata::Embedding e;
        e.name = name;
        e.dims = source_dims;
        const auto n = xyz.size() / 3;
        e.coords.reserve(n * source_dims);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::uint32_t d = 0; d < source_dims; ++d) {
                e.coords.push_back(xyz[i * 3 + d]);
            }
        }
        return e;
    }
};

class Store {
public:
    static Store open(const std::filesystem::path& path) {
        Store s;
        s.path_ = path;
        s.file_ = std::make_shared<MappedFile>(path);
        const auto bytes = s.file_->bytes();
        s.header_ = decode_header(bytes, bytes.size());
        for (std::size_t i = 0; i < section_count; ++i) {
            const auto& entry = s.header_.sections[i];
            if (crc32_of(bytes.subspan(entry.offset, entry.length)) != entry.crc) {
                throw Error(ErrorKind::CorruptSection, "checksum mismatch in section " + std::to_string(i));
            }
        }
        s.read_gene_index();
        s.read_expression();
        s.read_annotations();
        s.read_embeddings();
        if (s.header_.has_markers()) {
            s.read_markers();
        }
        return s;
    }

    const std::filesystem::path& path() const { return path_; }
    const StoreHeader& header() const { return header_; }
    std::size_t n_cells() const { return static_cast<std::size_t>(header_.n_cells); }
    std::size_t n_genes() const { return static_cast<std::size_t>(header_.n_genes); }
    std::size_t nonzero_count() const { return cells_.size(); }

    const std::vector<std::string>& gene_names() const { return gene_names_; }

    GeneColumnView column(std::size_t gene) const {
        if (gene >= n_genes()) {
            throw Error(ErrorKind::IndexOutOfRange, "gene " + std::to_string(gene) + " >= " + std::to_string(n_genes()));
        }
        const auto start = colptr_[gene], end = colptr_[gene + 1];
        if (start > end || end > cells_.size()) {
            throw Error(ErrorKind::CorruptSection, "column pointer for gene " + std::to_string(gene) + " is out of bounds");
        }
        GeneColumnView v;
        v.gene_index = static_cast<std::uint32_t>(gene);
        v.cell_indices = cells_.subspan(start, end - start);
        v.values = values_.subspan(start, end - start);
        v.max_value = maxima_[gene];
        return v;
    }

    /**
     * Dense expression of one gene across every cell.
     */
    DenseGeneColumn fetch_gene_column(std::size_t gene) const {
        const auto view = column(gene);
        DenseGeneColumn out;
        out.values.assign(n_cells(), 0.0);
        const auto n = n_cells();
        for (std::size_t k = 0; k < view.values.size(); ++k) {
            const auto cell = view.cell_indices[k];
            if (cell >= n) {
                throw Error(ErrorKind::CorruptSection, "cell index out of range in gene " + std::to_string(gene));
            }
            out.values[cell] = view.values[k];
        }
        out.max_value = view.max_value;
        out.nonzero_count = view.values.size();
        return out;
    }

    std::vector<GeneHit> lookup_gene(std::string_view query, std::size_t limit = max_gene_hits) const {
        return search_genes(gene_names_, lowered_sorted_, order_, query, limit);
    }

    /// Exact (case-sensitive) name lookup.
    std::optional<std::uint32_t> find_gene(std::string_view name) const {
        for (const auto& hit : lookup_gene(name, n_genes())) {
            if (hit.gene_name == name) {
                return hit.gene_index;
            }
        }
        return std::nullopt;
    }

    const std::vector<anndata::AnnotationColumn>& annotations() const { return annotations_; }

    const anndata::AnnotationColumn* find_annotation(std::string_view name) const {
        for (const auto& a : annotations_) {
            if (a.name == name) {
                return &a;
            }
        }
        return nullptr;
    }

    const std::vector<StoredEmbedding>& embeddings() const { return embeddings_; }

    const StoredEmbedding* find_embedding(std::string_view name) const {
        for (const auto& e : embeddings_) {
            if (e.name == name) {
                return &e;
            }
        }
        return nullptr;
    }

    std::optional<std::size_t> default_embedding() const {
        if (default_embedding_ == no_default_embedding) {
            return std::nullopt;
        }
        return default_embedding_;
    }

    bool has_markers() const { return header_.has_markers(); }
    const stats::MarkerCollection& markers() const { return markers_; }

    const stats::MarkerEntry* find_markers(std::string_view annotation, std::string_view category) const {
        for (const auto& m : markers_) {
            if (m.annotation == annotation && m.category == category) {
                return &m;
            }
        }
        return nullptr;
    }

    /// Raw bytes of a section, used when rewriting the file.
    std::span<const std::uint8_t> section_bytes(SectionId id) const {
        const auto& s = header_.section(id);
        return file_->bytes().subspan(s.offset, s.length);
    }

private:
    Store() = default;

    Reader section_reader(SectionId id, std::string_view what) const {
        return Reader(section_bytes(id), what);
    }

    void read_gene_index() {
        auto r = section_reader(SectionId::GeneIndex, "gene index");
        const auto n = r.get<std::uint64_t>();
        if (n != header_.n_genes) {
            throw Error(ErrorKind::CorruptSection, "gene index count disagrees with header");
        }
        gene_names_.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            gene_names_.push_back(r.get_string());
        }
        r.align(4);
        const auto order = r.get_array<std::uint32_t>(n);
        order_.assign(order.begin(), order.end());
        lowered_sorted_.reserve(n);
        for (auto g : order_) {
            if (g >= n) {
                throw Error(ErrorKind::CorruptSection, "gene order entry out of range");
            }
            lowered_sorted_.push_back(ascii_lower(gene_names_[g]));
        }
    }

    void read_expression() {
        auto r = section_reader(SectionId::Expression, "expression");
        const auto nnz = r.get<std::uint64_t>();
        colptr_ = r.get_array<std::uint64_t>(header_.n_genes + 1);
        maxima_ = r.get_array<double>(header_.n_genes);
        cells_ = r.get_array<std::uint32_t>(nnz);
        r.align(8);
        values_ = r.get_array<double>(nnz);
        if (colptr_.front() != 0 || colptr_.back() != nnz) {
            throw Error(ErrorKind::CorruptSection, "expression column pointers do not span the nonzeros");
        }
    }

    void read_annotations() {
        auto r = section_reader(SectionId::Annotations, "annotations");
        const auto count = r.get<std::uint32_t>();
        for (std::uint32_t i = 0; i < count; ++i) {
            anndata::AnnotationColumn a;
            a.name = r.get_string();
            const auto n_cat = r.get<std::uint32_t>();
            for (std::uint32_t c = 0; c < n_cat; ++c) {
                a.categories.push_back(r.get_string());
            }
            r.align(8);
            const auto n = r.get<std::uint64_t>();
            if (n != header_.n_cells) {
                throw Error(ErrorKind::CorruptSection, "annotation length disagrees with header");
            }
            const auto codes = r.get_array<std::int32_t>(n);
            a.codes.assign(codes.begin(), codes.end());
            for (auto c : a.codes) {
                if (c < 0 || static_cast<std::uint32_t>(c) >= n_cat) {
                    throw Error(ErrorKind::CorruptSection, "annotation code out of range");
                }
            }
            annotations_.push_back(std::move(a));
        }
    }

    void read_embeddings() {
        auto r = section_reader(SectionId::Embeddings, "embeddings");
        const auto count = r.get<std::uint32_t>();
        default_embedding_ = r.get<std::uint32_t>();
        if (default_embedding_ != no_default_embedding && default_embedding_ >= count) {
            throw Error(ErrorKind::CorruptSection, "default embedding index out of range");
        }
        for (std::uint32_t i = 0; i < count; ++i) {
            StoredEmbedding e;
            e.name = r.get_string();
            e.source_dims = r.get<std::uint32_t>();
            r.get<std::uint32_t>();
            r.align(8);
            const auto n = r.get<std::uint64_t>();
            if (n != header_.n_cells || (e.source_dims != 2 && e.source_dims != 3)) {
                throw Error(ErrorKind::CorruptSection, "malformed embedding block");
            }
            e.xyz = r.get_array<float>(n * 3);
            embeddings_.push_back(std::move(e));
        }
    }

    void read_markers() {
        auto r = section_reader(SectionId::Markers, "markers");
        const auto count = r.get<std::uint32_t>();
        for (std::uint32_t i = 0; i < count; ++i) {
            stats::MarkerEntry e;
            e.annotation = r.get_string();
            e.category = r.get_string();
            e.skipped = r.get<std::uint8_t>() != 0;
            e.reason = r.get_string();
            e.table.group_label = e.category;
            const auto n = r.get<std::uint32_t>();
            for (std::uint32_t k = 0; k < n; ++k) {
                stats::MarkerRecord rec;
                rec.gene_index = r.get<std::uint32_t>();
                if (rec.gene_index >= header_.n_genes) {
                    throw Error(ErrorKind::CorruptSection, "marker gene index out of range");
                }
                rec.gene_name = gene_names_[rec.gene_index];
                rec.t = r.get<double>();
                rec.df = r.get<double>();
                rec.p_value = r.get<double>();
                rec.log_fold_change = r.get<double>();
                e.table.records.push_back(std::move(rec));
            }
            markers_.push_back(std::move(e));
        }
    }

    std::filesystem::path path_;
    std::shared_ptr<MappedFile> file_;
    StoreHeader header_;

    std::vector<std::string> gene_names_;
    std::vector<std::string> lowered_sorted_;
    std::vector<std::uint32_t> order_;

    std::span<const std::uint64_t> colptr_;
    std::span<const double> maxima_;
    std::span<const std::uint32_t> cells_;
    std::span<const double> values_;

    std::vector<anndata::AnnotationColumn> annotations_;
    std::vector<StoredEmbedding> embeddings_;
    std::uint32_t default_embedding_ = no_default_embedding;
    stats::MarkerCollection markers_;
};

inline DenseGeneColumn fetch_gene_column(const Store& store, std::size_t gene) {
    return store.fetch_gene_column(gene);
}

inline std::vector<GeneHit> lookup_gene(const Store& store, std::string_view query) {
    return store.lookup_gene(query);
}

/**
 * Rewrite the store at `path` with `markers` in its marker section. The other
 * sections are copied verbatim and the file is replaced atomically, so open
 * stores keep reading their old mapping.
 */
inline StoreHeader attach_markers(const std::filesystem::path& path, const stats::MarkerCollection& markers) {
    const auto source = Store::open(path);
    StoreHeader header = source.header();
    header.flags |= flag_has_markers;

    detail::write_atomically(path, [&](std::ofstream& out) {
        SectionWriter w(out);
        w.skip_header();
        for (auto id : {SectionId::GeneIndex, SectionId::Expression, SectionId::Annotations, SectionId::Embeddings}) {
            const auto bytes = source.section_bytes(id);
            w.begin(header.section(id));
            w.write(bytes.data(), bytes.size());
            w.end(header.section(id));
        }
        w.begin(header.section(SectionId::Markers));
        write_markers(w, markers);
        w.end(header.section(SectionId::Markers));
        detail::finish_header(out, header);
    });
    return header;
}

}

#endif
