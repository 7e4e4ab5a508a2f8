#ifndef CELLSCOPE_SERVICE_DATASETS_HPP
#define CELLSCOPE_SERVICE_DATASETS_HPP

#include "../error.hpp"
#include "../spatial/point_index.hpp"
#include "../store/catalog.hpp"
#include "../store/store.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace cellscope::service {

/**
 * An open store plus lazily built spatial indexes over its embeddings.
 */
class DatasetHandle {
public:
    DatasetHandle(std::string id, std::string title, store::Store s) : id_(std::move(id)), title_(std::move(title)), store_(std::move(s)) {}

    const std::string& id() const { return id_; }
    const std::string& title() const { return title_; }
    const store::Store& store() const { return store_; }

    /// Index for the named embedding, or the default one when `name` is empty.
    std::shared_ptr<const spatial::PointIndex> index(const std::string& name) {
        const auto* e = resolve_embedding(name);
        std::lock_guard lock(mutex_);
        auto& slot = indexes_[e->name];
        if (!slot) {
            slot = std::make_shared<const spatial::PointIndex>(spatial::PointIndex::build(spatial::points_from_xyz(e->xyz)));
        }
        return slot;
    }

    const store::StoredEmbedding* resolve_embedding(const std::string& name) const {
        if (name.empty()) {
            const auto d = store_.default_embedding();
            if (!d) {
                throw Error(ErrorKind::BadRequest, "dataset '" + id_ + "' has no embedding");
            }
            return &store_.embeddings()[*d];
        }
        const auto* e = store_.find_embedding(name);
        if (!e) {
            throw Error(ErrorKind::NotFound, "dataset '" + id_ + "' has no embedding '" + name + "'");
        }
        return e;
    }

private:
    std::string id_;
    std::string title_;
    store::Store store_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const spatial::PointIndex>> indexes_;
};

/**
 * Stores opened on first use and kept open. Handles stay valid for holders
 * after invalidation; the next lookup reopens the file.
 */
class DatasetCache {
public:
    explicit DatasetCache(store::Catalog& catalog) : catalog_(catalog) {}

    std::shared_ptr<DatasetHandle> get(const std::string& id) {
        {
            std::lock_guard lock(mutex_);
            if (auto it = open_.find(id); it != open_.end()) {
                return it->second;
            }
        }
        const auto entry = catalog_.find(id);
        if (!entry) {
            throw Error(ErrorKind::UnknownDataset, "unknown dataset '" + id + "'");
        }
        if (!entry->store_path) {
            throw Error(ErrorKind::IllegalState, "dataset '" + id + "' has not been ingested");
        }
        auto handle = std::make_shared<DatasetHandle>(id, entry->title, store::Store::open(*entry->store_path));
        std::lock_guard lock(mutex_);
        return open_.try_emplace(id, std::move(handle)).first->second;
    }

    void invalidate(const std::string& id) {
        std::lock_guard lock(mutex_);
        open_.erase(id);
    }

    std::size_t open_count() const {
        std::lock_guard lock(mutex_);
        return open_.size();
    }

private:
    store::Catalog& catalog_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<DatasetHandle>> open_;
};

}

#endif
