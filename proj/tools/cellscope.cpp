// Command-line front end: catalog, download, ingest, precompute, de, serve.

#include "cellscope/service/server.hpp"

#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace cellscope;
using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::move(fallback);
}

std::filesystem::path default_data_dir() {
    if (const char* home = std::getenv("HOME"); home && *home) {
        return std::filesystem::path(home) / ".cellscope";
    }
    return ".cellscope";
}

struct Globals {
    std::string data_dir = env_or("CELLSCOPE_DATA_DIR", default_data_dir().string());
    std::string api_base = env_or("CELLSCOPE_API_BASE", discover::default_api_base);
    int port = std::atoi(env_or("CELLSCOPE_PORT", std::to_string(service::default_port)).c_str());

    discover::DiscoverConfig discover_config(const service::DataDir& dir) const {
        auto cfg = discover::DiscoverConfig::from_environment();
        cfg.api_base = api_base;
        cfg.cache_dir = dir.cache_dir();
        return cfg;
    }
};

/// Progress on stderr, one line per whole percent.
std::function<void(double)> percent_reporter(std::string label, bool quiet) {
    auto last = std::make_shared<int>(-1);
    return [label = std::move(label), quiet, last](double f) {
        const int pct = static_cast<int>(f * 100);
        if (!quiet && pct != *last) {
            *last = pct;
            std::cerr << label << ' ' << pct << "%\n";
        }
    };
}

std::vector<std::uint32_t> parse_cells(const std::string& spec) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto dash = item.find('-');
        try {
            if (dash == std::string::npos) {
                out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
            } else {
                const auto a = std::stoul(item.substr(0, dash)), b = std::stoul(item.substr(dash + 1));
                for (auto c = a; c <= b; ++c) {
                    out.push_back(static_cast<std::uint32_t>(c));
                }
            }
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::BadRequest, "bad cell list entry '" + item + "'");
        }
    }
    return out;
}

/// Selection spec in the JSON shape the HTTP API accepts.
json selection_spec(const std::string& cells, const std::string& category, const std::vector<double>& sphere, const std::string& embedding) {
    json spec{{"mode", "replace"}};
    if (!cells.empty()) {
        spec["cells"] = parse_cells(cells);
    }
    if (!category.empty()) {
        const auto eq = category.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::BadRequest, "--category takes annotation=value");
        }
        spec["category"] = {{"annotation", category.substr(0, eq)}, {"value", category.substr(eq + 1)}};
    }
    if (!sphere.empty()) {
        spec["sphere"] = {{"center", {sphere[0], sphere[1], sphere[2]}}, {"radius", sphere[3]}};
    }
    if (!embedding.empty()) {
        spec["embedding"] = embedding;
    }
    return spec;
}

void print_table(const stats::MarkerTable& table, std::size_t selection_size, bool as_json) {
    if (as_json) {
        std::cout << json{{"selection_size", selection_size}, {"table", service::detail::marker_table_json(table)}}.dump(2) << '\n';
    } else {
        stats::write_markers_tsv(std::cout, table);
    }
}

}

int main(int argc, char** argv) {
    CLI::App app{"cellscope: single-cell atlas exploration backend"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--data-dir", g.data_dir, "Data directory (env CELLSCOPE_DATA_DIR)");
    app.add_option("--api-base", g.api_base, "Discover API base URL (env CELLSCOPE_API_BASE)");
    app.add_option("--port", g.port, "HTTP port for serve (env CELLSCOPE_PORT)");
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "No progress output");

    auto* catalog_cmd = app.add_subcommand("catalog", "List remote collections, or local datasets with --local");
    std::string filter;
    bool local = false;
    catalog_cmd->add_option("--filter", filter, "Case-insensitive substring of the collection name");
    catalog_cmd->add_flag("--local", local, "List the local catalog instead");

    auto* download_cmd = app.add_subcommand("download", "Download a dataset's h5ad asset");
    std::string download_id;
    download_cmd->add_option("dataset", download_id, "Dataset id")->required();

    auto* ingest_cmd = app.add_subcommand("ingest", "Build the columnar store for a dataset");
    std::string ingest_id, ingest_file, ingest_title;
    ingest_cmd->add_option("--dataset", ingest_id, "Dataset id")->required();
    ingest_cmd->add_option("--file", ingest_file, "Local h5ad file to register under the id");
    ingest_cmd->add_option("--title", ingest_title, "Title for a registered file");

    auto* precompute_cmd = app.add_subcommand("precompute", "Compute marker genes for every annotation category");
    std::string precompute_id, precompute_tsv;
    precompute_cmd->add_option("--dataset", precompute_id, "Dataset id")->required();
    precompute_cmd->add_option("--tsv", precompute_tsv, "Also write all marker tables to this TSV file");

    auto* de_cmd = app.add_subcommand("de", "Differential expression of a selection against the rest");
    std::string de_id, de_cells, de_category, de_embedding;
    std::vector<double> de_sphere;
    bool de_json = false;
    de_cmd->add_option("--dataset", de_id, "Dataset id")->required();
    auto* cells_opt = de_cmd->add_option("--cells", de_cells, "Cell indices, e.g. 0-49,60");
    auto* cat_opt = de_cmd->add_option("--category", de_category, "annotation=value");
    auto* sphere_opt = de_cmd->add_option("--sphere", de_sphere, "x,y,z,r in embedding units")->delimiter(',')->expected(4);
    cells_opt->excludes(cat_opt, sphere_opt);
    cat_opt->excludes(sphere_opt);
    de_cmd->add_option("--embedding", de_embedding, "Embedding for --sphere (default: the dataset default)");
    de_cmd->add_flag("--json", de_json, "JSON instead of TSV");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    std::string host = "127.0.0.1";
    serve_cmd->add_option("--host", host, "Listen address");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto dir = service::DataDir::prepare(g.data_dir);
        store::Catalog catalog(dir.root());

        if (*catalog_cmd) {
            if (local) {
                for (const auto& e : catalog.list()) {
                    std::cout << e.dataset_id << '\t' << store::to_string(e.state()) << '\t' << store::to_string(e.source) << '\t' << e.title << '\n';
                }
                return 0;
            }
            discover::DiscoverClient client(g.discover_config(dir));
            const auto listing = client.list_collections(filter);
            if (listing.stale) {
                std::cerr << "warning: Discover unreachable, showing the cached listing\n";
            }
            for (const auto& c : listing.collections) {
                std::cout << c.collection_id << '\t' << c.name << '\n';
                for (const auto& d : c.datasets) {
                    std::cout << "  " << d.dataset_id << '\t' << d.title;
                    if (d.asset_size_bytes) {
                        std::cout << '\t' << *d.asset_size_bytes << " bytes";
                    }
                    std::cout << '\n';
                }
            }
        } else if (*download_cmd) {
            discover::DiscoverClient client(g.discover_config(dir));
            const auto ds = client.find_dataset(download_id);
            const auto report = percent_reporter("download", quiet);
            const auto path = client.download_dataset(ds, catalog, [&](std::uint64_t done, std::uint64_t total) {
                if (total) {
                    report(static_cast<double>(done) / static_cast<double>(total));
                }
            });
            std::cout << path.string() << '\n';
        } else if (*ingest_cmd) {
            if (!ingest_file.empty()) {
                service::register_local_file(catalog, ingest_id, ingest_file, ingest_title);
            }
            const auto entry = service::ingest_dataset(catalog, dir, ingest_id, percent_reporter("ingest", quiet));
            std::cout << entry.store_path->string() << '\n';
        } else if (*precompute_cmd) {
            const auto markers = service::precompute_dataset(catalog, precompute_id, percent_reporter("precompute", quiet));
            for (const auto& m : markers) {
                if (m.skipped) {
                    std::cerr << "skipped " << m.annotation << '/' << m.category << ": " << m.reason << '\n';
                }
            }
            if (!precompute_tsv.empty()) {
                std::ofstream out(precompute_tsv);
                stats::write_markers_tsv(out, markers);
                if (!out) {
                    throw Error(ErrorKind::IoFailure, "cannot write " + precompute_tsv);
                }
            }
            std::cout << markers.size() << " categories\n";
        } else if (*de_cmd) {
            if (de_cells.empty() && de_category.empty() && de_sphere.empty()) {
                throw Error(ErrorKind::BadRequest, "de needs one of --cells, --category or --sphere");
            }
            const auto entry = catalog.find(de_id);
            if (!entry) {
                throw Error(ErrorKind::UnknownDataset, "unknown dataset '" + de_id + "'");
            }
            if (!entry->store_path) {
                throw Error(ErrorKind::IllegalState, "dataset '" + de_id + "' has not been ingested");
            }
            service::DatasetHandle ds(de_id, entry->title, store::Store::open(*entry->store_path));
            const auto cells = service::detail::resolve_cells(ds, selection_spec(de_cells, de_category, de_sphere, de_embedding));
            const stats::SelectionMask mask(cells, ds.store().n_cells());
            print_table(stats::differential_expression(ds.store(), mask), mask.size(), de_json);
        } else if (*serve_cmd) {
            service::ServiceConfig cfg;
            cfg.host = host;
            cfg.port = g.port;
            cfg.data_dir = dir.root();
            cfg.discover = g.discover_config(dir);
            // Block the shutdown signals before any thread starts so only
            // the sigwait below receives them.
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);
            service::Service svc(cfg);
            const int port = svc.start();
            std::cerr << "listening on http://" << host << ':' << port << '\n';
            int sig = 0;
            sigwait(&signals, &sig);
            svc.stop();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
