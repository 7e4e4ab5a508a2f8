#ifndef CELLSCOPE_DISCOVER_CONFIG_HPP
#define CELLSCOPE_DISCOVER_CONFIG_HPP

#include "../error.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>

namespace cellscope::discover {

inline constexpr const char* default_api_base = "https://api.cellxgene.cziscience.com";
inline constexpr const char* api_base_env = "CELLSCOPE_API_BASE";

/**
 * Every endpoint path the client touches. `collection_path` contains a
 * `{collection_id}` placeholder.
 */
struct Endpoints {
    std::string collections_path = "/curation/v1/collections";
    std::string collection_path = "/curation/v1/collections/{collection_id}";
};

struct DiscoverConfig {
    std::string api_base = default_api_base;
    Endpoints endpoints;
    /// Directory for the listing cache; empty disables caching.
    std::filesystem::path cache_dir;
    std::chrono::seconds cache_ttl{24 * 60 * 60};
    std::size_t max_concurrent_downloads = 2;
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{60};

    /// Defaults, with the API base taken from the environment when set.
    static DiscoverConfig from_environment() {
        DiscoverConfig c;
        if (const char* base = std::getenv(api_base_env); base && *base) {
            c.api_base = base;
        }
        return c;
    }
};

/**
 * URL split into the `scheme://host[:port]` part httplib connects to and the
 * path (with query) it requests.
 */
struct Url {
    std::string origin;
    std::string path;
};

inline Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::MalformedResponse, "not an absolute URL: " + url);
    }
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw Error(ErrorKind::MalformedResponse, "unsupported URL scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

/// Join a base URL (possibly with a path prefix) and an endpoint path.
inline std::string join_url(std::string base, const std::string& path) {
    while (!base.empty() && base.back() == '/') {
        base.pop_back();
    }
    return base + (path.empty() || path.front() == '/' ? path : "/" + path);
}

}

#endif
