#ifndef CELLSCOPE_DISCOVER_CLIENT_HPP
#define CELLSCOPE_DISCOVER_CLIENT_HPP

#include "../error.hpp"
#include "../store/catalog.hpp"
#include "config.hpp"
#include "remote.hpp"
#include "sha256.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <semaphore>
#include <set>
#include <string>
#include <vector>

/**
 * @file client.hpp
 *
 * @brief Client for the CellxGene Discover catalog: listing with an on-disk
 * cache, and resumable asset downloads.
 *
 * Cache layout under `DiscoverConfig::cache_dir`:
 *
 *     collections.json   {"api_base": ..., "fetched_at": <unix seconds>, "body": <raw index response>}
 *
 * Downloads go to `<dest>/<dataset_id>.h5ad.part` and are renamed to
 * `<dest>/<dataset_id>.h5ad` once complete and verified. A leftover `.part`
 * file is resumed with an HTTP range request.
 */

namespace cellscope::discover {

struct CatalogListing {
    std::vector<RemoteCollection> collections;
    /// Served from cache because the server could not be reached.
    bool stale = false;
    bool from_cache = false;
    std::int64_t fetched_at = 0;
};

/// Called with (bytes written so far, expected total or 0 when unknown).
using ProgressFn = std::function<void(std::uint64_t, std::uint64_t)>;

class DiscoverClient {
public:
    explicit DiscoverClient(DiscoverConfig config = DiscoverConfig::from_environment())
        : config_(std::move(config)), slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_concurrent_downloads, 1, max_slots))) {}

    const DiscoverConfig& config() const { return config_; }

    /**
     * Collections whose name contains `filter`, case-insensitively. A fresh
     * cache is used without contacting the server; otherwise the index is
     * fetched, and if that fails any cached copy is served marked stale.
     */
    CatalogListing list_collections(const std::string& filter = {}) {
        CatalogListing listing = load_listing();
        std::erase_if(listing.collections, [&](const RemoteCollection& c) { return !name_matches(c, filter); });
        return listing;
    }

    /// One collection's detail document, always fetched from the server.
    RemoteCollection collection(const std::string& collection_id) {
        auto path = config_.endpoints.collection_path;
        const std::string placeholder = "{collection_id}";
        if (auto at = path.find(placeholder); at != std::string::npos) {
            path.replace(at, placeholder.size(), collection_id);
        }
        return parse_collection_detail(fetch(join_url(config_.api_base, path)));
    }

    /**
     * Look a dataset up by id. When the index omits its assets the owning
     * collection's detail is fetched to fill them in.
     */
    RemoteDataset find_dataset(const std::string& dataset_id) {
        for (const auto& c : list_collections().collections) {
            for (const auto& d : c.datasets) {
                if (d.dataset_id != dataset_id) {
                    continue;
                }
                if (d.h5ad_asset_url) {
                    return d;
                }
                for (const auto& full : collection(c.collection_id).datasets) {
                    if (full.dataset_id == dataset_id) {
                        return full;
                    }
                }
                return d;
            }
        }
        throw Error(ErrorKind::UnknownDataset, "dataset '" + dataset_id + "' is not in the remote catalog");
    }

    /**
     * Download the h5ad asset of `ds` into `dest_dir` and return the final
     * path. At most `max_concurrent_downloads` run at once; further calls
     * wait for a slot.
     */
    std::filesystem::path download_dataset(const RemoteDataset& ds, const std::filesystem::path& dest_dir, const ProgressFn& progress = {}) {
        if (!ds.h5ad_asset_url) {
            throw Error(ErrorKind::NoAssetAvailable, "dataset '" + ds.dataset_id + "' has no h5ad asset");
        }
        if (ds.dataset_id.empty() || ds.dataset_id.find_first_of("/\\") != std::string::npos || ds.dataset_id == "." || ds.dataset_id == "..") {
            throw Error(ErrorKind::InvalidData, "dataset id '" + ds.dataset_id + "' is not usable as a file name");
        }
        std::error_code ec;
        std::filesystem::create_directories(dest_dir, ec);
        if (ec) {
            throw Error(ErrorKind::IoFailure, "cannot create " + dest_dir.string() + ": " + ec.message());
        }

        InFlight claim(*this, ds.dataset_id);
        Slot slot(slots_);

        const auto final_path = dest_dir / (ds.dataset_id + ".h5ad");
        auto part_path = final_path;
        part_path += ".part";

        if (!transfer(ds, part_path, progress)) {
            // The server rejected our resume offset; start over once.
            std::filesystem::remove(part_path, ec);
            if (!transfer(ds, part_path, progress)) {
                throw Error(ErrorKind::NetworkUnavailable, "server refused the download of " + *ds.h5ad_asset_url);
            }
        }

        if (ds.sha256) {
            const auto actual = sha256_file(part_path);
            if (actual != *ds.sha256) {
                std::filesystem::remove(part_path, ec);
                throw Error(ErrorKind::ChecksumMismatch, "SHA-256 of " + ds.dataset_id + " is " + actual + ", catalog says " + *ds.sha256);
            }
        }
        std::filesystem::rename(part_path, final_path, ec);
        if (ec) {
            throw Error(ErrorKind::IoFailure, "cannot move download into place: " + ec.message());
        }
        return final_path;
    }

    /// Download into `<data_dir>/raw` and record the file in the catalog.
    std::filesystem::path download_dataset(const RemoteDataset& ds, store::Catalog& catalog, const ProgressFn& progress = {}) {
        auto path = download_dataset(ds, catalog.data_dir() / "raw", progress);
        catalog.register_raw(ds.dataset_id, ds.title, store::DatasetSource::CellxGene, path);
        return path;
    }

private:
    static constexpr std::size_t max_slots = 64;

    class Slot {
    public:
        explicit Slot(std::counting_semaphore<max_slots>& s) : s_(s) { s_.acquire(); }
        ~Slot() { s_.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        std::counting_semaphore<max_slots>& s_;
    };

    class InFlight {
    public:
        InFlight(DiscoverClient& c, std::string id) : c_(c), id_(std::move(id)) {
            std::lock_guard lock(c_.mutex_);
            if (!c_.in_flight_.insert(id_).second) {
                throw Error(ErrorKind::IllegalState, "dataset '" + id_ + "' is already downloading");
            }
        }
        ~InFlight() {
            std::lock_guard lock(c_.mutex_);
            c_.in_flight_.erase(id_);
        }
        InFlight(const InFlight&) = delete;
        InFlight& operator=(const InFlight&) = delete;

    private:
        DiscoverClient& c_;
        std::string id_;
    };

    httplib::Client make_client(const std::string& origin) const {
        httplib::Client cli(origin);
        cli.set_connection_timeout(config_.connect_timeout);
        cli.set_read_timeout(config_.read_timeout);
        cli.set_follow_location(true);
        return cli;
    }

    std::string fetch(const std::string& url) const {
        const auto u = split_url(url);
        auto cli = make_client(u.origin);
        auto res = cli.Get(u.path);
        if (!res) {
            throw Error(ErrorKind::NetworkUnavailable, "cannot reach " + url + ": " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(ErrorKind::NetworkUnavailable, url + " answered HTTP " + std::to_string(res->status));
        }
        return res->body;
    }

    std::filesystem::path cache_file() const { return config_.cache_dir / "collections.json"; }

    static std::int64_t now_seconds() {
        return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
    }

    struct CachedIndex {
        std::int64_t fetched_at = 0;
        std::string body;
    };

    std::optional<CachedIndex> read_cache() const {
        if (config_.cache_dir.empty()) {
            return std::nullopt;
        }
        std::ifstream in(cache_file(), std::ios::binary);
        if (!in) {
            return std::nullopt;
        }
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object() || j.value("api_base", "") != config_.api_base || !j.contains("body") || !j["body"].is_string()) {
            return std::nullopt;
        }
        return CachedIndex{j.value("fetched_at", std::int64_t{0}), j["body"].get<std::string>()};
    }

    void write_cache(const CachedIndex& entry) const {
        if (config_.cache_dir.empty()) {
            return;
        }
        static std::atomic<std::uint64_t> counter{0};
        std::error_code ec;
        std::filesystem::create_directories(config_.cache_dir, ec);
        auto tmp = cache_file();
        tmp += ".tmp" + std::to_string(counter++);
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << nlohmann::json{{"api_base", config_.api_base}, {"fetched_at", entry.fetched_at}, {"body", entry.body}}.dump();
            if (!out) {
                std::filesystem::remove(tmp, ec);
                return;
            }
        }
        std::filesystem::rename(tmp, cache_file(), ec);
        if (ec) {
            std::filesystem::remove(tmp, ec);
        }
    }

    CatalogListing load_listing() {
        const auto cached = read_cache();
        const auto now = now_seconds();
        if (cached && now - cached->fetched_at < config_.cache_ttl.count()) {
            try {
                return {parse_collections(cached->body), false, true, cached->fetched_at};
            } catch (const Error&) {
                // Unreadable cache; fall through to the network.
            }
        }

        std::string body;
        try {
            body = fetch(join_url(config_.api_base, config_.endpoints.collections_path));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NetworkUnavailable && cached) {
                return {parse_collections(cached->body), true, true, cached->fetched_at};
            }
            throw;
        }
        CatalogListing listing{parse_collections(body), false, false, now};
        write_cache({now, std::move(body)});
        return listing;
    }

    static std::optional<std::uint64_t> parse_content_range_total(const std::string& header, std::uint64_t& start) {
        // bytes <start>-<end>/<total>
        unsigned long long s = 0, e = 0, total = 0;
        if (std::sscanf(header.c_str(), "bytes %llu-%llu/%llu", &s, &e, &total) == 3) {
            start = s;
            return total;
        }
        return std::nullopt;
    }

    /**
     * One GET of the asset into `part_path`, appending when a partial file
     * exists and the server honours the range. Returns false when the server
     * answers 416 to the resume request.
     */
    bool transfer(const RemoteDataset& ds, const std::filesystem::path& part_path, const ProgressFn& progress) {
        const auto u = split_url(*ds.h5ad_asset_url);
        auto cli = make_client(u.origin);

        std::error_code ec;
        const std::uint64_t offset = std::filesystem::exists(part_path, ec) ? std::filesystem::file_size(part_path, ec) : 0;
        httplib::Headers headers;
        if (offset > 0) {
            headers.emplace("Range", "bytes=" + std::to_string(offset) + "-");
        }

        std::ofstream out;
        std::uint64_t done = 0, total = ds.asset_size_bytes.value_or(0);
        int status = 0;
        std::exception_ptr failure;
        std::string rejected;

        auto on_response = [&](const httplib::Response& r) {
            status = r.status;
            if (r.status == 206 && offset > 0) {
                std::uint64_t start = 0;
                const auto t = parse_content_range_total(r.get_header_value("Content-Range"), start);
                if (!t || start != offset) {
                    rejected = "partial content does not start at the resume offset";
                    return false;
                }
                total = *t;
                out.open(part_path, std::ios::binary | std::ios::app);
                done = offset;
            } else if (r.status == 200) {
                out.open(part_path, std::ios::binary | std::ios::trunc);
                done = 0;
                if (r.has_header("Content-Length")) {
                    total = std::stoull(r.get_header_value("Content-Length"));
                }
            } else if (r.status == 206) {
                rejected = "unrequested partial content";
                return false;
            } else {
                return false;
            }
            return static_cast<bool>(out);
        };
        auto on_data = [&](const char* data, std::size_t n) {
            out.write(data, static_cast<std::streamsize>(n));
            if (!out) {
                failure = std::make_exception_ptr(Error(ErrorKind::IoFailure, "cannot write " + part_path.string()));
                return false;
            }
            done += n;
            if (progress) {
                try {
                    progress(done, total);
                } catch (...) {
                    failure = std::current_exception();
                    return false;
                }
            }
            return true;
        };

        auto res = cli.Get(u.path, headers, on_response, on_data);
        out.close();
        if (failure) {
            std::rethrow_exception(failure);
        }
        if (status == 416) {
            return false;
        }
        if (!rejected.empty()) {
            throw Error(ErrorKind::MalformedResponse, "asset response for " + ds.dataset_id + ": " + rejected);
        }
        if (status != 200 && status != 206) {
            throw Error(ErrorKind::NetworkUnavailable, "asset request for " + ds.dataset_id + (status ? " answered HTTP " + std::to_string(status) : " failed: " + httplib::to_string(res.error())));
        }
        if (!res) {
            throw Error(ErrorKind::NetworkUnavailable, "download of " + ds.dataset_id + " interrupted after " + std::to_string(done) + " bytes: " + httplib::to_string(res.error()));
        }
        const auto size = std::filesystem::file_size(part_path, ec);
        if (ec || (total && size != total)) {
            throw Error(ErrorKind::NetworkUnavailable, "download of " + ds.dataset_id + " ended at " + std::to_string(size) + " of " + std::to_string(total) + " bytes");
        }
        return true;
    }

    DiscoverConfig config_;
    std::counting_semaphore<max_slots> slots_;
    std::mutex mutex_;
    std::set<std::string> in_flight_;
};

}

#endif
