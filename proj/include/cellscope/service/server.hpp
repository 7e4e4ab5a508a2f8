#ifndef CELLSCOPE_SERVICE_SERVER_HPP
#define CELLSCOPE_SERVICE_SERVER_HPP

#include "../discover/client.hpp"
#include "../error.hpp"
#include "../presentation/normalize.hpp"
#include "../presentation/palette.hpp"
#include "../presentation/view_state.hpp"
#include "../spatial/centroids.hpp"
#include "../spatial/lasso.hpp"
#include "../spatial/selection.hpp"
#include "../stats/differential.hpp"
#include "api_error.hpp"
#include "binary_block.hpp"
#include "datasets.hpp"
#include "jobs.hpp"
#include "pipeline.hpp"
#include "sessions.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <sys/socket.h>

#include <cmath>
#include <memory>
#include <string>
#include <thread>

/**
 * @file server.hpp
 *
 * @brief HTTP API over a data directory. Structured responses are JSON;
 * embeddings, annotation codes and expression are binary blocks (see
 * binary_block.hpp). Failures carry an ApiError body.
 */

#ifndef CELLSCOPE_VERSION
#define CELLSCOPE_VERSION "0.0.0"
#endif

namespace cellscope::service {

inline constexpr int default_port = 8750;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    /// 0 binds any free port.
    int port = default_port;
    std::filesystem::path data_dir;
    discover::DiscoverConfig discover = discover::DiscoverConfig::from_environment();
    stats::DifferentialOptions de_options;
};

namespace detail {

using nlohmann::json;

/// JSON number, or "inf" / "-inf" for the infinite t sentinel.
inline json number(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

inline json marker_table_json(const stats::MarkerTable& t) {
    json records = json::array();
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        records.push_back({{"rank", i + 1}, {"gene_index", r.gene_index}, {"gene", r.gene_name}, {"t", number(r.t)}, {"df", r.df}, {"p_value", r.p_value}, {"log2_fc", r.log_fold_change}});
    }
    return {{"group_label", t.group_label}, {"records", records}};
}

inline json gene_json(const store::Store& s, std::uint32_t g) {
    return {{"index", g}, {"name", s.gene_names()[g]}};
}

inline json view_json(const store::Store& s, const presentation::ViewState& v) {
    json genes = json::array();
    for (auto g : v.gene_set) {
        genes.push_back(gene_json(s, g));
    }
    json j{{"mode", presentation::to_string(v.mode)}, {"active_annotation", v.active_annotation}, {"gene_set", genes}, {"gene_cursor", v.gene_cursor}};
    j["annotation"] = v.active_annotation < s.annotations().size() ? json(s.annotations()[v.active_annotation].name) : json(nullptr);
    const auto g = presentation::current_gene(v);
    j["current_gene"] = g ? gene_json(s, *g) : json(nullptr);
    return j;
}

inline json parse_body(const httplib::Request& req) {
    if (req.body.empty()) {
        return json::object();
    }
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorKind::BadRequest, "request body must be a JSON object");
    }
    return j;
}

inline double finite_number(const json& j, const char* what) {
    if (!j.is_number()) {
        throw Error(ErrorKind::BadRequest, std::string(what) + " must be a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw Error(ErrorKind::BadRequest, std::string(what) + " must be finite");
    }
    return v;
}

/// Exact name first, then a case-insensitive exact match.
inline std::uint32_t resolve_gene(const store::Store& s, const std::string& query) {
    if (auto g = s.find_gene(query)) {
        return *g;
    }
    const auto lowered = store::ascii_lower(query);
    for (const auto& hit : store::lookup_gene(s, query)) {
        if (store::ascii_lower(hit.gene_name) == lowered) {
            return hit.gene_index;
        }
    }
    throw Error(ErrorKind::NotFound, "no gene named '" + query + "'");
}

/**
 * Cells named by a selection spec: exactly one of "cells", "sphere",
 * "lasso" or "category".
 */
inline std::vector<std::uint32_t> resolve_cells(DatasetHandle& ds, const json& spec) {
    const auto& s = ds.store();
    const std::string embedding = spec.value("embedding", "");
    int kinds = 0;
    for (auto key : {"cells", "sphere", "lasso", "category"}) {
        kinds += spec.contains(key) ? 1 : 0;
    }
    if (kinds != 1) {
        throw Error(ErrorKind::BadRequest, "selection needs exactly one of cells, sphere, lasso or category");
    }

    if (spec.contains("cells")) {
        const auto& cells = spec["cells"];
        if (!cells.is_array()) {
            throw Error(ErrorKind::BadRequest, "cells must be an array");
        }
        std::vector<std::uint32_t> out;
        for (const auto& c : cells) {
            if (!c.is_number_unsigned() || c.get<std::uint64_t>() >= s.n_cells()) {
                throw Error(ErrorKind::BadRequest, "cell indices must be integers below " + std::to_string(s.n_cells()));
            }
            out.push_back(c.get<std::uint32_t>());
        }
        return out;
    }
    if (spec.contains("sphere")) {
        const auto& sp = spec["sphere"];
        if (!sp.is_object() || !sp.contains("center") || !sp["center"].is_array() || sp["center"].size() != 3 || !sp.contains("radius")) {
            throw Error(ErrorKind::BadRequest, "sphere needs center [x, y, z] and radius");
        }
        const spatial::Point3 c{finite_number(sp["center"][0], "center"), finite_number(sp["center"][1], "center"), finite_number(sp["center"][2], "center")};
        return ds.index(embedding)->sphere_select(c, finite_number(sp["radius"], "radius"));
    }
    if (spec.contains("lasso")) {
        const auto& l = spec["lasso"];
        if (!l.is_object() || !l.contains("vertices") || !l["vertices"].is_array() || !l.contains("view_transform") || !l["view_transform"].is_array() || l["view_transform"].size() != 16) {
            throw Error(ErrorKind::BadRequest, "lasso needs vertices [[x, y], ...] and a 16-element row-major view_transform");
        }
        spatial::LassoPolygon lasso;
        for (const auto& v : l["vertices"]) {
            if (!v.is_array() || v.size() != 2) {
                throw Error(ErrorKind::BadRequest, "lasso vertices are [x, y] pairs");
            }
            lasso.vertices.push_back({finite_number(v[0], "vertex"), finite_number(v[1], "vertex")});
        }
        for (std::size_t i = 0; i < 16; ++i) {
            lasso.view_transform.m[i] = finite_number(l["view_transform"][i], "view_transform");
        }
        return spatial::lasso_select(ds.index(embedding)->points(), lasso);
    }
    const auto& cat = spec["category"];
    if (!cat.is_object() || !cat.contains("annotation") || !cat["annotation"].is_string() || !cat.contains("value") || !cat["value"].is_string()) {
        throw Error(ErrorKind::BadRequest, "category needs annotation and value");
    }
    const auto* a = s.find_annotation(cat["annotation"].get<std::string>());
    if (!a) {
        throw Error(ErrorKind::NotFound, "no annotation '" + cat["annotation"].get<std::string>() + "'");
    }
    return stats::category_mask(*a, cat["value"].get<std::string>()).selected();
}

inline void apply_selection(DatasetHandle& ds, Session& session, const json& spec) {
    if (!spec.contains("mode") || !spec["mode"].is_string()) {
        throw Error(ErrorKind::BadRequest, "selection needs a mode: add, replace or reset");
    }
    const auto mode = spatial::parse_combine_mode(spec["mode"].get<std::string>());
    if (!mode) {
        throw Error(ErrorKind::BadRequest, "unknown selection mode '" + spec["mode"].get<std::string>() + "'");
    }
    std::vector<std::uint32_t> cells;
    if (*mode != spatial::CombineMode::Reset) {
        cells = resolve_cells(ds, spec);
    }
    session.selection = spatial::combine_selection(session.selection, cells, *mode);
}

inline json selection_json(const stats::SelectionMask& m) {
    return {{"size", m.size()}, {"cells", m.selected()}};
}

}

class Service {
public:
    explicit Service(ServiceConfig config)
        : config_(std::move(config)), dir_(DataDir::prepare(config_.data_dir)), catalog_(dir_.root()), datasets_(catalog_) {
        if (config_.discover.cache_dir.empty()) {
            config_.discover.cache_dir = dir_.cache_dir();
        }
        discover_ = std::make_unique<discover::DiscoverClient>(config_.discover);
        // Plain SO_REUSEADDR: a second server on a busy port must fail to bind.
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        });
        routes();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    ~Service() { stop(); }

    /// Bind and start serving on a background thread; returns the bound port.
    int start() {
        if (config_.port == 0) {
            port_ = server_.bind_to_any_port(config_.host);
        } else {
            port_ = server_.bind_to_port(config_.host, config_.port) ? config_.port : -1;
        }
        if (port_ <= 0) {
            throw Error(ErrorKind::PortInUse, "cannot listen on " + config_.host + ":" + std::to_string(config_.port));
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) {
            thread_.join();
        }
    }

    /// Block until the server stops.
    void wait() {
        if (thread_.joinable()) {
            thread_.join();
        }
    }

    int port() const { return port_; }
    const DataDir& data_dir() const { return dir_; }
    store::Catalog& catalog() { return catalog_; }
    JobRegistry& jobs() { return jobs_; }
    std::size_t open_store_count() const { return datasets_.open_count(); }

private:
    using json = nlohmann::json;
    using Req = httplib::Request;
    using Res = httplib::Response;

    template<class Fn>
    auto guarded(Fn fn) {
        return [fn](const Req& req, Res& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                send_error(res, to_api_error(e));
            } catch (const json::exception& e) {
                send_error(res, {ApiCode::BadRequest, e.what(), {{"kind", "BadRequest"}}});
            } catch (const std::exception& e) {
                send_error(res, {ApiCode::Internal, e.what(), {{"kind", "Internal"}}});
            }
        };
    }

    static void send_error(Res& res, const ApiError& e) {
        res.status = http_status(e.code);
        res.set_content(e.to_json().dump(), "application/json");
    }

    static void send_json(Res& res, const json& j, int status = 200) {
        res.status = status;
        res.set_content(j.dump(), "application/json");
    }

    static void send_block(Res& res, std::string bytes) {
        res.status = 200;
        res.set_content(std::move(bytes), "application/octet-stream");
    }

    void routes() {
        server_.Get("/health", guarded([](const Req&, Res& res) { send_json(res, {{"status", "ok"}, {"version", CELLSCOPE_VERSION}}); }));

        server_.Get("/catalog/remote", guarded([this](const Req& req, Res& res) {
            const auto listing = discover_->list_collections(req.get_param_value("filter"));
            json collections = json::array();
            for (const auto& c : listing.collections) {
                json datasets = json::array();
                for (const auto& d : c.datasets) {
                    json dj{{"dataset_id", d.dataset_id}, {"title", d.title}, {"downloadable", d.h5ad_asset_url.has_value()}};
                    if (d.asset_size_bytes) {
                        dj["asset_size_bytes"] = *d.asset_size_bytes;
                    }
                    datasets.push_back(dj);
                }
                collections.push_back({{"collection_id", c.collection_id}, {"name", c.name}, {"datasets", datasets}});
            }
            send_json(res, {{"stale", listing.stale}, {"fetched_at", listing.fetched_at}, {"collections", collections}});
        }));

        server_.Get("/catalog/local", guarded([this](const Req&, Res& res) {
            json out = json::array();
            for (const auto& e : catalog_.list()) {
                out.push_back({{"dataset_id", e.dataset_id}, {"title", e.title}, {"source", store::to_string(e.source)}, {"state", store::to_string(e.state())}});
            }
            send_json(res, {{"datasets", out}});
        }));

        server_.Post(R"(/catalog/download/([^/]+))", guarded([this](const Req& req, Res& res) {
            const auto id = req.matches[1].str();
            auto status = jobs_.submit("download", id, [this, id](const std::function<void(double)>& progress) {
                const auto ds = discover_->find_dataset(id);
                const auto path = discover_->download_dataset(ds, catalog_, [&](std::uint64_t done, std::uint64_t total) {
                    if (total) {
                        progress(static_cast<double>(done) / static_cast<double>(total));
                    }
                });
                return json{{"path", path.string()}};
            });
            send_json(res, status.to_json(), 202);
        }));

        server_.Post(R"(/datasets/([^/]+)/ingest)", guarded([this](const Req& req, Res& res) {
            const auto id = req.matches[1].str();
            const auto body = detail::parse_body(req);
            if (body.contains("path")) {
                if (!body["path"].is_string()) {
                    throw Error(ErrorKind::BadRequest, "path must be a string");
                }
                register_local_file(catalog_, id, body["path"].get<std::string>(), body.value("title", ""));
            } else if (!catalog_.find(id)) {
                throw Error(ErrorKind::UnknownDataset, "unknown dataset '" + id + "'");
            }
            auto status = jobs_.submit("ingest", id, [this, id](const std::function<void(double)>& progress) {
                const auto entry = ingest_dataset(catalog_, dir_, id, progress);
                datasets_.invalidate(id);
                return json{{"state", store::to_string(entry.state())}};
            });
            send_json(res, status.to_json(), 202);
        }));

        server_.Post(R"(/datasets/([^/]+)/precompute)", guarded([this](const Req& req, Res& res) {
            const auto id = req.matches[1].str();
            const auto entry = catalog_.find(id);
            if (!entry) {
                throw Error(ErrorKind::UnknownDataset, "unknown dataset '" + id + "'");
            }
            if (!entry->store_path) {
                throw Error(ErrorKind::IllegalState, "dataset '" + id + "' has not been ingested");
            }
            auto status = jobs_.submit("precompute", id, [this, id](const std::function<void(double)>& progress) {
                const auto markers = precompute_dataset(catalog_, id, progress, config_.de_options);
                datasets_.invalidate(id);
                std::size_t skipped = 0;
                for (const auto& m : markers) {
                    skipped += m.skipped ? 1 : 0;
                }
                return json{{"categories", markers.size()}, {"skipped", skipped}};
            });
            send_json(res, status.to_json(), 202);
        }));

        server_.Get(R"(/jobs/([^/]+))", guarded([this](const Req& req, Res& res) {
            const auto status = jobs_.status(req.matches[1].str());
            if (!status) {
                throw Error(ErrorKind::NotFound, "unknown job '" + req.matches[1].str() + "'");
            }
            send_json(res, status->to_json());
        }));

        server_.Get(R"(/datasets/([^/]+)/meta)", guarded([this](const Req& req, Res& res) {
            const auto ds = datasets_.get(req.matches[1].str());
            const auto& s = ds->store();
            json annotations = json::array();
            for (const auto& a : s.annotations()) {
                annotations.push_back({{"name", a.name}, {"categories", a.categories}});
            }
            json embeddings = json::array();
            for (const auto& e : s.embeddings()) {
                embeddings.push_back({{"name", e.name}, {"source_dims", e.source_dims}});
            }
            const auto d = s.default_embedding();
            send_json(res, {{"dataset_id", ds->id()},
                            {"title", ds->title()},
                            {"n_cells", s.n_cells()},
                            {"n_genes", s.n_genes()},
                            {"nonzero_count", s.nonzero_count()},
                            {"annotations", annotations},
                            {"embeddings", embeddings},
                            {"default_embedding", d ? json(s.embeddings()[*d].name) : json(nullptr)},
                            {"has_markers", s.has_markers()}});
        }));

        server_.Get(R"(/datasets/([^/]+)/embedding/([^/]+))", guarded([this](const Req& req, Res& res) {
            const auto ds = datasets_.get(req.matches[1].str());
            const auto* e = ds->resolve_embedding(req.matches[2].str());
            const auto index = ds->index(e->name);
            const auto lo = index->bounds_min(), hi = index->bounds_max();
            send_block(res, encode_block<float>(BlockType::F32, 3, e->xyz, {{"name", e->name}, {"source_dims", e->source_dims}, {"bounds", {{"min", lo}, {"max", hi}}}}));
        }));

        server_.Get(R"(/datasets/([^/]+)/annotation/([^/]+))", guarded([this](const Req& req, Res& res) {
            const auto ds = datasets_.get(req.matches[1].str());
            const auto& s = ds->store();
            const auto* a = s.find_annotation(req.matches[2].str());
            if (!a) {
                throw Error(ErrorKind::NotFound, "no annotation '" + req.matches[2].str() + "'");
            }
            json meta{{"name", a->name}, {"categories", a->categories}, {"palette", presentation::categorical_palette(a->categories.size())}};
            json centroids = json::array();
            if (s.default_embedding() || req.has_param("embedding")) {
                const auto index = ds->index(req.get_param_value("embedding"));
                for (const auto& c : spatial::category_centroids(index->points(), *a)) {
                    centroids.push_back({{"category", c.category}, {"label", c.label}, {"position", {c.position.x, c.position.y, c.position.z}}, {"count", c.count}});
                }
            }
            meta["centroids"] = centroids;
            send_block(res, encode_block<std::int32_t>(BlockType::I32, 1, a->codes, meta));
        }));

        server_.Get(R"(/datasets/([^/]+)/genes)", guarded([this](const Req& req, Res& res) {
            const auto ds = datasets_.get(req.matches[1].str());
            json genes = json::array();
            for (const auto& h : store::lookup_gene(ds->store(), req.get_param_value("q"))) {
                genes.push_back({{"index", h.gene_index}, {"name", h.gene_name}});
            }
            send_json(res, {{"genes", genes}});
        }));

        server_.Get(R"(/datasets/([^/]+)/expression/([^/]+))", guarded([this](const Req& req, Res& res) {
            const auto ds = datasets_.get(req.matches[1].str());
            const auto& s = ds->store();
            const auto g = detail::resolve_gene(s, req.matches[2].str());
            const auto column = s.fetch_gene_column(g);
            const auto normalized = presentation::normalize_expression(column.values, s.gene_names()[g]);
            const auto quantized = presentation::quantize_u16(normalized.values);
            const auto& info = normalized.info;
            send_block(res, encode_block<std::uint16_t>(BlockType::U16, 1, quantized,
                                                         {{"gene_index", g},
                                                          {"gene_name", info.gene_name},
                                                          {"n_cells", s.n_cells()},
                                                          {"nonzero_count", column.nonzero_count},
                                                          {"raw_min", info.raw_min},
                                                          {"raw_max", info.raw_max},
                                                          {"clip_value", info.clip_value},
                                                          {"scale", 65535}}));
        }));

        server_.Get(R"(/datasets/([^/]+)/markers/([^/]+)/([^/]+))", guarded([this](const Req& req, Res& res) {
            const auto ds = datasets_.get(req.matches[1].str());
            const auto& s = ds->store();
            if (!s.has_markers()) {
                throw Error(ErrorKind::NotFound, "markers have not been precomputed for '" + ds->id() + "'");
            }
            const auto* m = s.find_markers(req.matches[2].str(), req.matches[3].str());
            if (!m) {
                throw Error(ErrorKind::NotFound, "no markers for " + req.matches[2].str() + "/" + req.matches[3].str());
            }
            json j{{"annotation", m->annotation}, {"category", m->category}, {"skipped", m->skipped}, {"table", detail::marker_table_json(m->table)}};
            if (m->skipped) {
                j["reason"] = m->reason;
            }
            send_json(res, j);
        }));

        server_.Post("/sessions", guarded([this](const Req& req, Res& res) {
            const auto body = detail::parse_body(req);
            if (!body.contains("dataset_id") || !body["dataset_id"].is_string()) {
                throw Error(ErrorKind::BadRequest, "dataset_id is required");
            }
            const auto ds = datasets_.get(body["dataset_id"].get<std::string>());
            const auto session = sessions_.create(ds->id(), ds->store().n_cells(), ds->store().annotations().size());
            std::lock_guard lock(session->mutex);
            send_json(res, session_json(*ds, *session), 201);
        }));

        server_.Get(R"(/sessions/([^/]+))", guarded([this](const Req& req, Res& res) {
            const auto session = sessions_.find(req.matches[1].str());
            const auto ds = datasets_.get(session->dataset_id);
            std::lock_guard lock(session->mutex);
            send_json(res, session_json(*ds, *session));
        }));

        server_.Post(R"(/sessions/([^/]+)/selection)", guarded([this](const Req& req, Res& res) {
            const auto session = sessions_.find(req.matches[1].str());
            const auto ds = datasets_.get(session->dataset_id);
            const auto body = detail::parse_body(req);
            std::lock_guard lock(session->mutex);
            sync(*ds, *session);
            detail::apply_selection(*ds, *session, body);
            send_json(res, {{"selection", detail::selection_json(session->selection)}});
        }));

        server_.Post(R"(/sessions/([^/]+)/de)", guarded([this](const Req& req, Res& res) {
            const auto session = sessions_.find(req.matches[1].str());
            const auto ds = datasets_.get(session->dataset_id);
            const auto body = detail::parse_body(req);
            std::lock_guard lock(session->mutex);
            sync(*ds, *session);
            if (body.contains("mode")) {
                detail::apply_selection(*ds, *session, body);
            }
            const auto& sel = session->selection;
            try {
                const auto table = stats::differential_expression(ds->store(), sel, config_.de_options);
                send_json(res, {{"selection_size", sel.size()}, {"table", detail::marker_table_json(table)}});
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::SelectionTooSmall) {
                    throw;
                }
                auto err = to_api_error(e);
                err.detail["selected"] = sel.size();
                err.detail["unselected"] = sel.complement_size();
                send_error(res, err);
            }
        }));

        server_.Post(R"(/sessions/([^/]+)/view)", guarded([this](const Req& req, Res& res) {
            const auto session = sessions_.find(req.matches[1].str());
            const auto ds = datasets_.get(session->dataset_id);
            const auto body = detail::parse_body(req);
            const std::string action = body.value("action", "");
            presentation::ViewAction a;
            if (action == "toggle_mode") {
                a = presentation::view_action::ToggleMode{};
            } else if (action == "next_annotation") {
                a = presentation::view_action::NextAnnotation{};
            } else if (action == "next_gene") {
                a = presentation::view_action::NextGene{};
            } else if (action == "prev_gene") {
                a = presentation::view_action::PrevGene{};
            } else if (action == "load_gene_set") {
                if (!body.contains("genes") || !body["genes"].is_array()) {
                    throw Error(ErrorKind::BadRequest, "load_gene_set needs a genes array");
                }
                presentation::view_action::LoadGeneSet load;
                for (const auto& g : body["genes"]) {
                    if (g.is_string()) {
                        load.genes.push_back(detail::resolve_gene(ds->store(), g.get<std::string>()));
                    } else if (g.is_number_unsigned() && g.get<std::uint64_t>() < ds->store().n_genes()) {
                        load.genes.push_back(g.get<std::uint32_t>());
                    } else {
                        throw Error(ErrorKind::BadRequest, "genes are names or indices below " + std::to_string(ds->store().n_genes()));
                    }
                }
                a = std::move(load);
            } else {
                throw Error(ErrorKind::BadRequest, "unknown view action '" + action + "'");
            }
            std::lock_guard lock(session->mutex);
            sync(*ds, *session);
            session->view = presentation::step_view(session->view, a);
            send_json(res, {{"view", detail::view_json(ds->store(), session->view)}});
        }));
    }

    /// Reset a session whose dataset was rebuilt with a different shape.
    static void sync(const DatasetHandle& ds, Session& session) {
        const auto& s = ds.store();
        if (session.selection.n_cells() != s.n_cells()) {
            session.selection = stats::SelectionMask({}, s.n_cells());
        }
        if (session.view.annotation_count != s.annotations().size()) {
            session.view = {};
            session.view.annotation_count = s.annotations().size();
        }
        std::erase_if(session.view.gene_set, [&](std::uint32_t g) { return g >= s.n_genes(); });
        if (session.view.gene_cursor >= session.view.gene_set.size()) {
            session.view.gene_cursor = 0;
        }
    }

    static json session_json(const DatasetHandle& ds, const Session& session) {
        return {{"session_id", session.session_id},
                {"dataset_id", session.dataset_id},
                {"selection", detail::selection_json(session.selection)},
                {"view", detail::view_json(ds.store(), session.view)}};
    }

    ServiceConfig config_;
    DataDir dir_;
    store::Catalog catalog_;
    DatasetCache datasets_;
    SessionRegistry sessions_;
    std::unique_ptr<discover::DiscoverClient> discover_;
    JobRegistry jobs_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = -1;
};

}

#endif
