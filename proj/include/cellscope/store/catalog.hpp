#ifndef CELLSCOPE_STORE_CATALOG_HPP
#define CELLSCOPE_STORE_CATALOG_HPP

#include "../error.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

/**
 * @file catalog.hpp
 *
 * @brief Manifest of the datasets known to a data directory.
 *
 * The manifest is a text file, `catalog.txt`, made of blocks:
 *
 *     # cellscope catalog v1
 *     [dataset <id>]
 *     title = <text>
 *     source = cellxgene | local
 *     raw_path = <path>        (optional)
 *     store_path = <path>      (optional)
 *     state = raw_only | processed | both
 *
 * Values escape backslash and newline as `\\` and `\n`. Every mutation
 * rewrites the whole manifest to a temporary file and renames it into place.
 */

namespace cellscope::store {

enum class DatasetSource { CellxGene, Local };
enum class DatasetState { RawOnly, Processed, Both };

inline std::string_view to_string(DatasetSource s) {
    return s == DatasetSource::CellxGene ? "cellxgene" : "local";
}

inline std::string_view to_string(DatasetState s) {
    switch (s) {
        case DatasetState::RawOnly: return "raw_only";
        case DatasetState::Processed: return "processed";
        case DatasetState::Both: return "both";
    }
    return "raw_only";
}

struct CatalogEntry {
    std::string dataset_id;
    std::string title;
    DatasetSource source = DatasetSource::Local;
    std::optional<std::filesystem::path> raw_path;
    std::optional<std::filesystem::path> store_path;

    DatasetState state() const {
        if (raw_path && store_path) {
            return DatasetState::Both;
        }
        return store_path ? DatasetState::Processed : DatasetState::RawOnly;
    }

    bool operator==(const CatalogEntry&) const = default;
};

namespace detail {

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '\\') {
            out += "\\\\";
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

inline std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            ++i;
            out += (s[i] == 'n') ? '\n' : s[i];
        } else {
            out += s[i];
        }
    }
    return out;
}

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

}

/**
 * Dataset manifest bound to one data directory. All methods are serialized by
 * an internal mutex; the returned entries are snapshots.
 */
class Catalog {
public:
    explicit Catalog(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {}

    static constexpr const char* manifest_name = "catalog.txt";

    std::filesystem::path manifest_path() const { return data_dir_ / manifest_name; }
    const std::filesystem::path& data_dir() const { return data_dir_; }

    std::vector<CatalogEntry> list() const {
        std::lock_guard lock(mutex_);
        return load();
    }

    std::optional<CatalogEntry> find(std::string_view id) const {
        std::lock_guard lock(mutex_);
        for (auto& e : load()) {
            if (e.dataset_id == id) {
                return e;
            }
        }
        return std::nullopt;
    }

    /**
     * Record a raw h5ad file. Registering an existing id updates its raw path
     * and title, keeping any store.
     */
    CatalogEntry register_raw(const std::string& id, const std::string& title, DatasetSource source, const std::filesystem::path& raw_path) {
        if (id.empty() || id.find_first_of("[]\n") != std::string::npos) {
            throw Error(ErrorKind::InvalidData, "invalid dataset id '" + id + "'");
        }
        return mutate([&](std::vector<CatalogEntry>& entries) -> CatalogEntry {
            auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.dataset_id == id; });
            if (it == entries.end()) {
                entries.push_back({id, title, source, raw_path, std::nullopt});
                return entries.back();
            }
            it->title = title;
            it->source = source;
            it->raw_path = raw_path;
            return *it;
        });
    }

    CatalogEntry mark_processed(const std::string& id, const std::filesystem::path& store_path) {
        return mutate([&](std::vector<CatalogEntry>& entries) {
            auto& e = require(entries, id);
            e.store_path = store_path;
            return e;
        });
    }

    /**
     * Drop the raw file; only allowed once a store exists. Downloaded files
     * are deleted, local files are only forgotten since they belong to the
     * user.
     */
    CatalogEntry delete_raw(const std::string& id) {
        return mutate([&](std::vector<CatalogEntry>& entries) {
            auto& e = require(entries, id);
            if (e.state() != DatasetState::Both) {
                throw Error(ErrorKind::IllegalState, "dataset '" + id + "' has no store; refusing to delete its raw file");
            }
            if (e.source == DatasetSource::CellxGene) {
                std::error_code ec;
                std::filesystem::remove(*e.raw_path, ec);
            }
            e.raw_path.reset();
            return e;
        });
    }

    /**
     * Delete the store file. An entry left with neither file is removed and
     * returned with both paths empty.
     */
    CatalogEntry delete_store(const std::string& id) {
        return mutate([&](std::vector<CatalogEntry>& entries) {
            auto& e = require(entries, id);
            if (!e.store_path) {
                throw Error(ErrorKind::IllegalState, "dataset '" + id + "' has no store");
            }
            std::error_code ec;
            std::filesystem::remove(*e.store_path, ec);
            e.store_path.reset();
            CatalogEntry snapshot = e;
            if (!e.raw_path) {
                entries.erase(std::find_if(entries.begin(), entries.end(), [&](const auto& x) { return x.dataset_id == id; }));
            }
            return snapshot;
        });
    }

    static std::vector<CatalogEntry> parse(std::istream& in) {
        std::vector<CatalogEntry> entries;
        std::string line;
        std::optional<std::string> declared_state;
        auto finish = [&]() {
            if (entries.empty()) {
                return;
            }
            const auto& e = entries.back();
            if (!e.raw_path && !e.store_path) {
                throw Error(ErrorKind::InvalidData, "catalog entry '" + e.dataset_id + "' has no files");
            }
            if (declared_state && *declared_state != to_string(e.state())) {
                throw Error(ErrorKind::InvalidData, "catalog entry '" + e.dataset_id + "' declares state " + *declared_state + " inconsistent with its paths");
            }
            declared_state.reset();
        };

        while (std::getline(in, line)) {
            const auto t = detail::trim(line);
            if (t.empty() || t[0] == '#') {
                continue;
            }
            if (t.front() == '[') {
                finish();
                const std::string prefix = "[dataset ";
                if (t.compare(0, prefix.size(), prefix) != 0 || t.back() != ']') {
                    throw Error(ErrorKind::InvalidData, "bad catalog section header: " + t);
                }
                CatalogEntry e;
                e.dataset_id = detail::trim(t.substr(prefix.size(), t.size() - prefix.size() - 1));
                for (const auto& existing : entries) {
                    if (existing.dataset_id == e.dataset_id) {
                        throw Error(ErrorKind::InvalidData, "duplicate catalog entry " + e.dataset_id);
                    }
                }
                entries.push_back(std::move(e));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos || entries.empty()) {
                throw Error(ErrorKind::InvalidData, "bad catalog line: " + t);
            }
            const auto key = detail::trim(t.substr(0, eq));
            const auto value = detail::unescape(detail::trim(t.substr(eq + 1)));
            auto& e = entries.back();
            if (key == "title") {
                e.title = value;
            } else if (key == "source") {
                if (value != "cellxgene" && value != "local") {
                    throw Error(ErrorKind::InvalidData, "unknown dataset source " + value);
                }
                e.source = value == "cellxgene" ? DatasetSource::CellxGene : DatasetSource::Local;
            } else if (key == "raw_path") {
                e.raw_path = value;
            } else if (key == "store_path") {
                e.store_path = value;
            } else if (key == "state") {
                declared_state = value;
            }
        }
        finish();
        return entries;
    }

    static void serialize(std::ostream& out, const std::vector<CatalogEntry>& entries) {
        out << "# cellscope catalog v1\n";
        for (const auto& e : entries) {
            out << "\n[dataset " << e.dataset_id << "]\n";
            out << "title = " << detail::escape(e.title) << "\n";
            out << "source = " << to_string(e.source) << "\n";
            if (e.raw_path) {
                out << "raw_path = " << detail::escape(e.raw_path->string()) << "\n";
            }
            if (e.store_path) {
                out << "store_path = " << detail::escape(e.store_path->string()) << "\n";
            }
            out << "state = " << to_string(e.state()) << "\n";
        }
    }

private:
    std::vector<CatalogEntry> load() const {
        std::ifstream in(manifest_path());
        if (!in) {
            return {};
        }
        return parse(in);
    }

    void save(const std::vector<CatalogEntry>& entries) const {
        std::filesystem::create_directories(data_dir_);
        auto tmp = manifest_path();
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            serialize(out, entries);
            out.flush();
            if (!out) {
                throw Error(ErrorKind::IoFailure, "cannot write " + tmp.string());
            }
        }
        std::error_code ec;
        std::filesystem::rename(tmp, manifest_path(), ec);
        if (ec) {
            throw Error(ErrorKind::IoFailure, "cannot replace " + manifest_path().string());
        }
    }

    static CatalogEntry& require(std::vector<CatalogEntry>& entries, const std::string& id) {
        auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.dataset_id == id; });
        if (it == entries.end()) {
            throw Error(ErrorKind::UnknownDataset, "unknown dataset '" + id + "'");
        }
        return *it;
    }

    template<class Fn>
    CatalogEntry mutate(Fn&& fn) {
        std::lock_guard lock(mutex_);
        auto entries = load();
        CatalogEntry result = fn(entries);
        save(entries);
        return result;
    }

    std::filesystem::path data_dir_;
    mutable std::mutex mutex_;
};

}

#endif
