#ifndef CELLSCOPE_DISCOVER_REMOTE_HPP
#define CELLSCOPE_DISCOVER_REMOTE_HPP

#include "../error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

/**
 * @file remote.hpp
 *
 * @brief Catalog records as served by the Discover curation API, and their
 * parsing. Only the fields the launcher needs are kept; unknown fields are
 * ignored.
 */

namespace cellscope::discover {

struct RemoteDataset {
    std::string dataset_id;
    std::string collection_id;
    std::string title;
    std::optional<std::string> h5ad_asset_url;
    std::optional<std::uint64_t> asset_size_bytes;
    /// Hex SHA-256 of the asset, when the catalog publishes one.
    std::optional<std::string> sha256;

    bool operator==(const RemoteDataset&) const = default;
};

struct RemoteCollection {
    std::string collection_id;
    std::string name;
    std::vector<RemoteDataset> datasets;

    bool operator==(const RemoteCollection&) const = default;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void malformed(const std::string& what) {
    throw Error(ErrorKind::MalformedResponse, "malformed catalog response: " + what);
}

inline std::string required_string(const json& obj, std::initializer_list<const char*> keys, const char* what) {
    for (auto key : keys) {
        auto it = obj.find(key);
        if (it != obj.end() && it->is_string() && !it->get<std::string>().empty()) {
            return it->get<std::string>();
        }
    }
    malformed(std::string("missing ") + what);
}

inline std::string optional_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string();
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline RemoteDataset parse_dataset(const json& j, const std::string& collection_id) {
    if (!j.is_object()) {
        malformed("dataset is not an object");
    }
    RemoteDataset d;
    d.dataset_id = required_string(j, {"dataset_id", "id"}, "dataset_id");
    d.collection_id = collection_id;
    d.title = optional_string(j, "title");
    if (d.title.empty()) {
        d.title = optional_string(j, "name");
    }
    auto assets = j.find("assets");
    if (assets == j.end() || assets->is_null()) {
        return d;
    }
    if (!assets->is_array()) {
        malformed("assets is not an array");
    }
    for (const auto& a : *assets) {
        if (!a.is_object() || lower(optional_string(a, "filetype")) != "h5ad") {
            continue;
        }
        const auto url = optional_string(a, "url");
        if (url.empty()) {
            continue;
        }
        d.h5ad_asset_url = url;
        if (auto size = a.find("filesize"); size != a.end() && size->is_number_unsigned()) {
            d.asset_size_bytes = size->get<std::uint64_t>();
        }
        if (auto sha = optional_string(a, "sha256"); !sha.empty()) {
            d.sha256 = lower(sha);
        }
        break;
    }
    return d;
}

inline RemoteCollection parse_collection(const json& j) {
    if (!j.is_object()) {
        malformed("collection is not an object");
    }
    RemoteCollection c;
    c.collection_id = required_string(j, {"collection_id", "id"}, "collection_id");
    c.name = optional_string(j, "name");
    auto datasets = j.find("datasets");
    if (datasets != j.end() && !datasets->is_null()) {
        if (!datasets->is_array()) {
            malformed("datasets is not an array");
        }
        for (const auto& d : *datasets) {
            c.datasets.push_back(parse_dataset(d, c.collection_id));
        }
    }
    return c;
}

inline json parse_json(const std::string& body) {
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded()) {
        malformed("body is not JSON");
    }
    return j;
}

}

/// Parse the collections index: a JSON array of collection objects.
inline std::vector<RemoteCollection> parse_collections(const std::string& body) {
    const auto j = detail::parse_json(body);
    if (!j.is_array()) {
        detail::malformed("collections index is not an array");
    }
    std::vector<RemoteCollection> out;
    for (const auto& c : j) {
        out.push_back(detail::parse_collection(c));
    }
    return out;
}

/// Parse one collection's detail document.
inline RemoteCollection parse_collection_detail(const std::string& body) {
    return detail::parse_collection(detail::parse_json(body));
}

/// Case-insensitive substring match on the collection name.
inline bool name_matches(const RemoteCollection& c, const std::string& filter) {
    return filter.empty() || detail::lower(c.name).find(detail::lower(filter)) != std::string::npos;
}

}

#endif
