#ifndef CELLSCOPE_SERVICE_PIPELINE_HPP
#define CELLSCOPE_SERVICE_PIPELINE_HPP

#include "../anndata/h5ad.hpp"
#include "../error.hpp"
#include "../stats/differential.hpp"
#include "../store/build.hpp"
#include "../store/catalog.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

/**
 * @file pipeline.hpp
 *
 * @brief Data directory layout and the ingest and precompute steps shared by
 * the HTTP service and the command line.
 *
 *     <data_dir>/catalog.txt          dataset manifest
 *     <data_dir>/raw/<id>.h5ad        downloaded h5ad files
 *     <data_dir>/stores/<id>.crvo     built stores
 *     <data_dir>/cache/               Discover listing cache
 */

namespace cellscope::service {

/// Fraction complete in [0, 1].
using StepProgress = std::function<void(double)>;

class DataDir {
public:
    explicit DataDir(std::filesystem::path root) : root_(std::move(root)) {}

    /**
     * Create the layout and check that it can be written to.
     */
    static DataDir prepare(const std::filesystem::path& root) {
        DataDir d(root);
        std::error_code ec;
        for (const auto& p : {d.root_, d.raw_dir(), d.store_dir(), d.cache_dir()}) {
            std::filesystem::create_directories(p, ec);
            if (ec) {
                throw Error(ErrorKind::DataDirUnwritable, "cannot create " + p.string() + ": " + ec.message());
            }
        }
        const auto probe = d.root_ / ".write-probe";
        {
            std::ofstream out(probe);
            out << "ok";
            if (!out) {
                throw Error(ErrorKind::DataDirUnwritable, "cannot write to " + d.root_.string());
            }
        }
        std::filesystem::remove(probe, ec);
        return d;
    }

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path raw_dir() const { return root_ / "raw"; }
    std::filesystem::path store_dir() const { return root_ / "stores"; }
    std::filesystem::path cache_dir() const { return root_ / "cache"; }
    std::filesystem::path store_path(const std::string& id) const { return store_dir() / (id + ".crvo"); }

private:
    std::filesystem::path root_;
};

/**
 * Record an h5ad file that already exists on disk. It is referenced in place.
 */
inline store::CatalogEntry register_local_file(store::Catalog& catalog, const std::string& id, const std::filesystem::path& file, const std::string& title = {}) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(file, ec)) {
        throw Error(ErrorKind::FileNotReadable, "no such file: " + file.string());
    }
    return catalog.register_raw(id, title.empty() ? file.stem().string() : title, store::DatasetSource::Local, std::filesystem::absolute(file));
}

/**
 * Parse the dataset's raw h5ad and build its store.
 */
inline store::CatalogEntry ingest_dataset(store::Catalog& catalog, const DataDir& dir, const std::string& id, const StepProgress& progress = {}, const store::BuildOptions& options = {}) {
    const auto entry = catalog.find(id);
    if (!entry) {
        throw Error(ErrorKind::UnknownDataset, "unknown dataset '" + id + "'");
    }
    if (!entry->raw_path) {
        throw Error(ErrorKind::IllegalState, "dataset '" + id + "' has no raw file to ingest");
    }
    auto report = [&](double f) {
        if (progress) {
            progress(f);
        }
    };
    report(0.0);
    const auto raw = anndata::open_and_parse(*entry->raw_path);
    report(0.5);
    store::build_store(raw, dir.store_path(id), options);
    report(1.0);
    return catalog.mark_processed(id, dir.store_path(id));
}

/**
 * Compute and persist per-category markers for a processed dataset.
 */
inline stats::MarkerCollection precompute_dataset(store::Catalog& catalog, const std::string& id, const StepProgress& progress = {}, const stats::DifferentialOptions& options = {}) {
    const auto entry = catalog.find(id);
    if (!entry) {
        throw Error(ErrorKind::UnknownDataset, "unknown dataset '" + id + "'");
    }
    if (!entry->store_path) {
        throw Error(ErrorKind::IllegalState, "dataset '" + id + "' has not been ingested");
    }
    return stats::precompute_and_store(*entry->store_path, options, [&](std::size_t done, std::size_t total) {
        if (progress && total) {
            progress(static_cast<double>(done) / static_cast<double>(total));
        }
    });
}

}

#endif
