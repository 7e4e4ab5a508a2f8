#include <gtest/gtest.h>

#include "cellscope/discover/client.hpp"
#include "support/mock_discover.hpp"
#include "support/temp_dir.hpp"

#include <cstdlib>
#include <thread>

using namespace cellscope;
using namespace cellscope::discover;
using cellscope_test::MockDiscover;
using cellscope_test::TempDir;
using cellscope_test::throws_kind;

namespace {

DiscoverConfig config_for(const MockDiscover& mock, const TempDir& dir) {
    DiscoverConfig c;
    c.api_base = mock.base_url();
    c.cache_dir = dir / "cache";
    c.connect_timeout = std::chrono::seconds(2);
    c.read_timeout = std::chrono::seconds(5);
    return c;
}

std::vector<std::string> names(const CatalogListing& l) {
    std::vector<std::string> out;
    for (const auto& c : l.collections) {
        out.push_back(c.name);
    }
    return out;
}

}

TEST(DiscoverConfig, UrlHelpers) {
    EXPECT_EQ(split_url("https://api.example.org/a/b?x=1").origin, "https://api.example.org");
    EXPECT_EQ(split_url("https://api.example.org/a/b?x=1").path, "/a/b?x=1");
    EXPECT_EQ(split_url("http://127.0.0.1:8080").path, "/");
    EXPECT_TRUE(throws_kind(ErrorKind::MalformedResponse, [] { split_url("ftp://x/y"); }));
    EXPECT_TRUE(throws_kind(ErrorKind::MalformedResponse, [] { split_url("nope"); }));
    EXPECT_EQ(join_url("http://h/prefix/", "/curation/v1/collections"), "http://h/prefix/curation/v1/collections");
}

TEST(DiscoverConfig, EnvironmentOverridesBase) {
    ::unsetenv(api_base_env);
    EXPECT_EQ(DiscoverConfig::from_environment().api_base, default_api_base);
    ::setenv(api_base_env, "http://localhost:9", 1);
    EXPECT_EQ(DiscoverConfig::from_environment().api_base, "http://localhost:9");
    ::unsetenv(api_base_env);
}

TEST(DiscoverParse, ExtractsH5adAsset) {
    const auto c = parse_collection_detail(R"({"id":"c","name":"N","datasets":[
        {"id":"d","title":"T","assets":[{"filetype":"RDS","url":"http://x/d.rds"},{"filetype":"h5ad","url":"http://x/d.h5ad","filesize":12,"sha256":"ABC"}]},
        {"dataset_id":"e","name":"E only"}]})");
    ASSERT_EQ(c.datasets.size(), 2u);
    EXPECT_EQ(c.datasets[0], (RemoteDataset{"d", "c", "T", "http://x/d.h5ad", 12, "abc"}));
    EXPECT_EQ(c.datasets[1].title, "E only");
    EXPECT_FALSE(c.datasets[1].h5ad_asset_url);
}

TEST(DiscoverParse, RejectsMalformedBodies) {
    EXPECT_TRUE(throws_kind(ErrorKind::MalformedResponse, [] { parse_collections("{not json"); }));
    EXPECT_TRUE(throws_kind(ErrorKind::MalformedResponse, [] { parse_collections(R"({"collections":[]})"); }));
    EXPECT_TRUE(throws_kind(ErrorKind::MalformedResponse, [] { parse_collections(R"([{"name":"no id"}])"); }));
    EXPECT_TRUE(throws_kind(ErrorKind::MalformedResponse, [] { parse_collections(R"([{"collection_id":"c","datasets":{}}])"); }));
    EXPECT_TRUE(throws_kind(ErrorKind::MalformedResponse, [] { parse_collections(R"([{"collection_id":"c","datasets":[{"title":"x"}]}])"); }));
}

TEST(DiscoverClient, ListsAndFilters) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient client(config_for(mock, dir));
    const auto all = client.list_collections();
    EXPECT_EQ(names(all), (std::vector<std::string>{"Human Lung Cell Atlas", "Mouse brain", "Kidney"}));
    EXPECT_FALSE(all.stale);
    EXPECT_EQ(names(client.list_collections("lung")), (std::vector<std::string>{"Human Lung Cell Atlas"}));
    EXPECT_EQ(names(client.list_collections("BRAIN")), (std::vector<std::string>{"Mouse brain"}));
    EXPECT_TRUE(client.list_collections("pancreas").collections.empty());
}

TEST(DiscoverClient, MalformedResponse) {
    MockDiscover mock;
    TempDir dir;
    mock.set_index_body("<html>oops</html>");
    DiscoverClient client(config_for(mock, dir));
    EXPECT_TRUE(throws_kind(ErrorKind::MalformedResponse, [&] { client.list_collections(); }));
    EXPECT_FALSE(std::filesystem::exists(dir / "cache" / "collections.json"));
}

TEST(DiscoverClient, CacheWithinTtlSkipsNetwork) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient client(config_for(mock, dir));
    const auto first = client.list_collections();
    mock.set_index_body("[]");
    const auto second = client.list_collections();
    EXPECT_EQ(mock.index_requests, 1);
    EXPECT_TRUE(second.from_cache);
    EXPECT_FALSE(second.stale);
    EXPECT_EQ(second.collections, first.collections);
}

TEST(DiscoverClient, ExpiredCacheRefetchesAndServesStaleWhenDown) {
    auto mock = std::make_unique<MockDiscover>();
    TempDir dir;
    auto cfg = config_for(*mock, dir);
    cfg.cache_ttl = std::chrono::seconds(0);
    DiscoverClient client(cfg);
    const auto fresh = client.list_collections();
    const auto again = client.list_collections();
    EXPECT_EQ(mock->index_requests, 2);
    EXPECT_EQ(again.collections, fresh.collections);

    mock->stop();
    const auto stale = client.list_collections("kidney");
    EXPECT_TRUE(stale.stale);
    ASSERT_EQ(stale.collections.size(), 1u);
    EXPECT_EQ(stale.collections[0], fresh.collections[2]);

    TempDir empty;
    cfg.cache_dir = empty / "cache";
    DiscoverClient uncached(cfg);
    EXPECT_TRUE(throws_kind(ErrorKind::NetworkUnavailable, [&] { uncached.list_collections(); }));
}

TEST(DiscoverClient, CacheIgnoredForDifferentApiBase) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient(config_for(mock, dir)).list_collections();
    auto cfg = config_for(mock, dir);
    cfg.api_base = mock.base_url() + "/";
    mock.set_index_body("[]");
    EXPECT_TRUE(DiscoverClient(cfg).list_collections().collections.empty());
}

TEST(DiscoverClient, FindDatasetFillsAssetsFromDetail) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient client(config_for(mock, dir));
    const auto lung = client.find_dataset("lung-1");
    EXPECT_EQ(lung.collection_id, "c-lung");
    EXPECT_EQ(lung.h5ad_asset_url, mock.asset_url("lung-1"));
    EXPECT_EQ(lung.asset_size_bytes, MockDiscover::asset_size);
    EXPECT_FALSE(client.find_dataset("brain-2").h5ad_asset_url);
    EXPECT_TRUE(throws_kind(ErrorKind::UnknownDataset, [&] { client.find_dataset("nope"); }));
}

TEST(DiscoverDownload, FullDownloadRegistersRawOnly) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient client(config_for(mock, dir));
    store::Catalog catalog(dir.path());
    std::uint64_t last = 0, total_seen = 0;
    bool monotone = true;
    const auto path = client.download_dataset(client.find_dataset("lung-1"), catalog, [&](std::uint64_t done, std::uint64_t total) {
        monotone = monotone && done >= last;
        last = done;
        total_seen = total;
    });
    EXPECT_EQ(path, dir / "raw" / "lung-1.h5ad");
    EXPECT_EQ(std::filesystem::file_size(path), 1048576u);
    EXPECT_EQ(cellscope_test::read_file(path), mock.asset("lung-1"));
    EXPECT_FALSE(std::filesystem::exists(dir / "raw" / "lung-1.h5ad.part"));
    EXPECT_TRUE(monotone);
    EXPECT_EQ(last, 1048576u);
    EXPECT_EQ(total_seen, 1048576u);
    const auto entry = catalog.find("lung-1");
    ASSERT_TRUE(entry);
    EXPECT_EQ(entry->state(), store::DatasetState::RawOnly);
    EXPECT_EQ(entry->source, store::DatasetSource::CellxGene);
    EXPECT_EQ(entry->title, "Lung epithelium");
}

TEST(DiscoverDownload, ResumesAfterDisconnect) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient client(config_for(mock, dir));
    const auto ds = client.find_dataset("lung-1");
    const auto final_path = dir / "dl" / "lung-1.h5ad";

    mock.disconnect_next_at(MockDiscover::asset_size / 2);
    EXPECT_TRUE(throws_kind(ErrorKind::NetworkUnavailable, [&] { client.download_dataset(ds, dir / "dl"); }));
    EXPECT_FALSE(std::filesystem::exists(final_path));
    EXPECT_EQ(std::filesystem::file_size(dir / "dl" / "lung-1.h5ad.part"), MockDiscover::asset_size / 2);

    EXPECT_EQ(client.download_dataset(ds, dir / "dl"), final_path);
    EXPECT_EQ(mock.last_range(), "bytes=524288-");
    EXPECT_EQ(cellscope_test::read_file(final_path), mock.asset("lung-1"));
}

TEST(DiscoverDownload, RestartsWhenServerIgnoresRanges) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient client(config_for(mock, dir));
    const auto ds = client.find_dataset("kidney-1");
    mock.disconnect_next_at(3000);
    EXPECT_TRUE(throws_kind(ErrorKind::NetworkUnavailable, [&] { client.download_dataset(ds, dir.path()); }));
    mock.ranges_supported = false;
    const auto path = client.download_dataset(ds, dir.path());
    EXPECT_EQ(cellscope_test::read_file(path), mock.asset("kidney-1"));
}

// Property: however the transfer is cut short, nothing appears under the
// final name, and a later resume produces the exact asset.
TEST(DiscoverDownload, CrashInjectionNeverExposesPartialFile) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient client(config_for(mock, dir));
    const auto ds = client.find_dataset("lung-1");
    const auto final_path = dir / "lung-1.h5ad";
    cellscope_test::Rng rng(42);
    for (int trial = 0; trial < 6; ++trial) {
        const auto crash_at = rng.below(MockDiscover::asset_size);
        struct Crash {};
        try {
            client.download_dataset(ds, dir.path(), [&](std::uint64_t done, std::uint64_t) {
                EXPECT_FALSE(std::filesystem::exists(final_path));
                if (done >= crash_at) {
                    throw Crash{};
                }
            });
            ADD_FAILURE() << "download was expected to crash";
        } catch (const Crash&) {
        }
        EXPECT_FALSE(std::filesystem::exists(final_path)) << "trial " << trial;
        if (trial % 2 == 0) {
            mock.disconnect_next_at(rng.below(MockDiscover::asset_size));
            try {
                client.download_dataset(ds, dir.path());
            } catch (const Error& e) {
                EXPECT_EQ(e.kind(), ErrorKind::NetworkUnavailable);
            }
            if (std::filesystem::exists(final_path)) {
                EXPECT_EQ(cellscope_test::read_file(final_path), mock.asset("lung-1"));
                std::filesystem::remove(final_path);
            }
        }
    }
    client.download_dataset(ds, dir.path());
    EXPECT_EQ(cellscope_test::read_file(final_path), mock.asset("lung-1"));
}

TEST(DiscoverDownload, ChecksumVerification) {
    MockDiscover mock;
    TempDir dir;
    mock.set_publish_sha256("brain-1", std::string(64, '0'));
    DiscoverClient client(config_for(mock, dir));
    EXPECT_TRUE(throws_kind(ErrorKind::ChecksumMismatch, [&] { client.download_dataset(client.find_dataset("brain-1"), dir.path()); }));
    EXPECT_FALSE(std::filesystem::exists(dir / "brain-1.h5ad"));
    EXPECT_FALSE(std::filesystem::exists(dir / "brain-1.h5ad.part"));

    auto ds = client.find_dataset("brain-1");
    std::filesystem::create_directories(dir / "probe");
    {
        std::ofstream(dir / "probe" / "x", std::ios::binary) << mock.asset("brain-1");
    }
    ds.sha256 = sha256_file(dir / "probe" / "x");
    EXPECT_EQ(cellscope_test::read_file(client.download_dataset(ds, dir.path())), mock.asset("brain-1"));
}

TEST(DiscoverDownload, Sha256KnownAnswer) {
    TempDir dir;
    std::ofstream(dir / "abc") << "abc";
    EXPECT_EQ(sha256_file(dir / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(DiscoverDownload, NoAssetAvailable) {
    MockDiscover mock;
    TempDir dir;
    DiscoverClient client(config_for(mock, dir));
    EXPECT_TRUE(throws_kind(ErrorKind::NoAssetAvailable, [&] { client.download_dataset(client.find_dataset("brain-2"), dir.path()); }));
    RemoteDataset bad{"../escape", "c", "t", mock.asset_url("brain-1"), std::nullopt, std::nullopt};
    EXPECT_TRUE(throws_kind(ErrorKind::InvalidData, [&] { client.download_dataset(bad, dir.path()); }));
}

TEST(DiscoverDownload, AtMostTwoConcurrentTransfers) {
    MockDiscover mock;
    TempDir dir;
    mock.chunk_delay_ms = 100;
    DiscoverClient client(config_for(mock, dir));
    std::vector<RemoteDataset> targets;
    for (int i = 0; i < 4; ++i) {
        auto ds = client.find_dataset("kidney-1");
        ds.dataset_id = "copy" + std::to_string(i);
        targets.push_back(ds);
    }
    std::vector<std::thread> threads;
    for (const auto& ds : targets) {
        threads.emplace_back([&, ds] { client.download_dataset(ds, dir.path()); });
    }
    for (auto& t : threads) {
        t.join();
    }
    EXPECT_EQ(mock.max_active_transfers, 2);
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(cellscope_test::read_file(dir / ("copy" + std::to_string(i) + ".h5ad")), mock.asset("kidney-1"));
    }
}
