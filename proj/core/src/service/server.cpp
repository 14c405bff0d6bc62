#include <codegraph/service/server.hpp>

#include <codegraph/query.hpp>
#include <codegraph/service/pipeline.hpp>
#include <codegraph/service/session.hpp>
#include <codegraph/snapshot.hpp>
#include <codegraph/util/text.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <map>
#include <mutex>
#include <thread>

namespace codegraph::service {

using json = nlohmann::json;

namespace {

json node_summary(const Node& n) {
    json attrs = json::object();
    for (const auto& [k, v] : n.attrs) {
        if (k != attrs::kSource) attrs[k] = v;
    }
    return json{{"id", n.id.str()},
                {"kind", to_string(n.kind)},
                {"name", n.name},
                {"description", n.description ? json(*n.description) : json(nullptr)},
                {"attrs", attrs}};
}

json edge_json(const Edge& e) {
    return json{{"src", e.src.str()}, {"label", e.label}, {"dst", e.dst.str()}, {"attrs", e.attrs}};
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, json extra = json::object()) {
    extra["error"] = message;
    send_json(res, status, extra);
}

std::string slug(std::string_view name) {
    std::string out;
    for (char c : name) {
        const auto u = static_cast<unsigned char>(c);
        out.push_back(std::isalnum(u) || c == '-' || c == '_' ? static_cast<char>(std::tolower(u)) : '-');
    }
    return out.empty() ? std::string("system") : out;
}

std::string sse(std::string_view event, const json& data) {
    return "event: " + std::string(event) + "\ndata: " + data.dump() + "\n\n";
}

} // namespace

nlohmann::json query_rows_json(const QueryRows& rows) {
    if (rows.count) return json{{"count", *rows.count}};
    json out{{"columns", rows.columns}, {"rows", json::array()}};
    for (const auto& row : rows.rows) {
        json r = json::array();
        for (const auto& id : row) r.push_back(id.str());
        out["rows"].push_back(std::move(r));
    }
    return out;
}

struct SystemState {
    SystemConfig config;
    std::mutex mutex;
    std::shared_ptr<Session> session;
    std::shared_ptr<BuildJob> job;
    std::thread worker;
    std::map<std::string, std::string> traces; // id -> JSON lines
};

struct ApiServer::Impl {
    ServerOptions options;
    httplib::Server http;
    std::mutex mutex;
    std::map<std::string, std::shared_ptr<SystemState>> systems;
    std::map<std::string, std::shared_ptr<BuildJob>> jobs;
    std::atomic<std::uint64_t> sequence{0};

    explicit Impl(ServerOptions opts) : options(std::move(opts)) {
        if (!options.provider_factory) {
            options.provider_factory = [](const SystemConfig& c, ProviderUse use) {
                return make_provider(c.provider, use);
            };
        }
        routes();
    }

    ~Impl() {
        std::vector<std::shared_ptr<SystemState>> all;
        {
            std::lock_guard lock(mutex);
            for (auto& [id, s] : systems) all.push_back(s);
        }
        for (auto& s : all) {
            if (s->worker.joinable()) s->worker.join();
        }
    }

    std::shared_ptr<SystemState> find(const std::string& id) {
        std::lock_guard lock(mutex);
        auto it = systems.find(id);
        return it == systems.end() ? nullptr : it->second;
    }

    std::string add(const SystemConfig& config) {
        auto state = std::make_shared<SystemState>();
        state->config = config;
        if (!config.snapshot.empty() && std::filesystem::exists(config.snapshot)) {
            auto graph = load_snapshot(config.snapshot);
            state->session = std::make_shared<Session>(config, std::move(graph),
                                                       options.provider_factory(config, ProviderUse::Session));
        }
        std::lock_guard lock(mutex);
        const auto base = slug(config.system);
        auto id = base;
        for (int n = 2; systems.count(id); ++n) {
            if (config_to_json(systems[id]->config) == config_to_json(config)) return id;
            id = base + "-" + std::to_string(n);
        }
        systems.emplace(id, std::move(state));
        return id;
    }

    void start_build(const std::string& system_id, const std::shared_ptr<SystemState>& s,
                     const std::shared_ptr<BuildJob>& job) {
        if (s->worker.joinable()) s->worker.join();
        s->worker = std::thread([this, s, job] {
            try {
                auto provider = options.provider_factory(s->config, ProviderUse::Build);
                auto outcome = run_build(s->config, *provider, [&](BuildPhase p) {
                    if (p != BuildPhase::Done) job->advance(p);
                });
                job->set_counter("nodes", outcome.graph.node_count());
                job->set_counter("edges", outcome.graph.edge_count());
                job->set_counter("entities", outcome.enrichment.entities);
                job->set_counter("embedded", outcome.embedding.embedded);
                job->add_diagnostics(outcome.enrichment.diagnostics);
                job->add_diagnostics(outcome.embedding.diagnostics);
                for (const auto& d : outcome.extraction.diagnostics) {
                    job->add_diagnostics({d.file + ":" + std::to_string(d.line) + ": " + d.message});
                }
                auto session = std::make_shared<Session>(s->config, std::move(outcome.graph),
                                                         options.provider_factory(s->config, ProviderUse::Session));
                {
                    std::lock_guard lock(s->mutex);
                    s->session = std::move(session);
                }
                job->advance(BuildPhase::Done);
            } catch (const std::exception& e) {
                job->fail(e.what());
            }
        });
        (void)system_id;
    }

    std::string next_trace_id(const std::string& question) {
        const auto n = ++sequence;
        return "trace-" + std::to_string(n) + "-" + util::hash_hex(question).substr(0, 8);
    }

    void routes() {
        http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });

        http.Post("/api/systems", [this](const httplib::Request& req, httplib::Response& res) {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::parse_error& e) {
                return send_error(res, 422, std::string("invalid JSON: ") + e.what());
            }
            try {
                std::filesystem::path base = std::filesystem::current_path();
                if (body.is_object() && body.contains("base_dir")) {
                    base = body["base_dir"].get<std::string>();
                    body.erase("base_dir");
                }
                auto config = parse_config(body, base);
                send_json(res, 201, {{"systemId", add(config)}});
            } catch (const Error& e) {
                send_error(res, 422, e.what(), {{"code", to_string(e.code())}});
            } catch (const json::exception& e) {
                send_error(res, 422, e.what());
            }
        });

        http.Post(R"(/api/systems/([^/]+)/build)", [this](const httplib::Request& req, httplib::Response& res) {
            const auto id = req.matches[1].str();
            auto s = find(id);
            if (!s) return send_error(res, 404, "unknown system " + id);
            std::shared_ptr<BuildJob> job;
            {
                std::lock_guard lock(mutex);
                if (s->job && !s->job->finished()) {
                    return send_error(res, 409, "build already in progress", {{"jobId", s->job->id()}});
                }
                job = std::make_shared<BuildJob>("job-" + std::to_string(++sequence), id);
                s->job = job;
                jobs.emplace(job->id(), job);
            }
            try {
                validate_config(s->config);
            } catch (const Error& e) {
                job->fail(e.what());
                return send_error(res, 422, e.what(), {{"code", to_string(e.code())}, {"jobId", job->id()}});
            }
            start_build(id, s, job);
            send_json(res, 202, {{"jobId", job->id()}});
        });

        http.Get(R"(/api/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            std::shared_ptr<BuildJob> job;
            {
                std::lock_guard lock(mutex);
                auto it = jobs.find(req.matches[1].str());
                if (it != jobs.end()) job = it->second;
            }
            if (!job) return send_error(res, 404, "unknown job " + req.matches[1].str());
            send_json(res, 200, job->to_json());
        });

        http.Get(R"(/api/systems/([^/]+)/graph)", [this](const httplib::Request& req, httplib::Response& res) {
            auto session = session_of(req.matches[1].str(), res);
            if (!session) return;
            const auto& g = session->graph();
            std::optional<NodeKind> kind;
            if (req.has_param("kind")) {
                kind = parse_node_kind(req.get_param_value("kind"));
                if (!kind) return send_error(res, 422, "unknown kind " + req.get_param_value("kind"));
            }
            std::optional<std::set<NodeId>> scope;
            if (req.has_param("projectId")) {
                const NodeId pid(req.get_param_value("projectId"));
                const auto* p = g.find(pid);
                if (!p || p->kind != NodeKind::Project) return send_error(res, 404, "unknown project " + pid.str());
                scope = g.neighborhood(pid, Direction::Out, std::set<std::string>{std::string(labels::kContains)}, 1);
                scope->insert(pid);
            }
            std::size_t limit = 200, offset = 0;
            try {
                if (req.has_param("limit")) limit = std::stoul(req.get_param_value("limit"));
                if (req.has_param("offset")) offset = std::stoul(req.get_param_value("offset"));
            } catch (const std::exception&) {
                return send_error(res, 422, "limit and offset must be non-negative integers");
            }
            if (limit == 0 || limit > 5000) return send_error(res, 422, "limit must be in [1, 5000]");

            std::vector<const Node*> selected;
            for (const auto& [id, n] : g.nodes()) {
                if (kind && n.kind != *kind) continue;
                if (scope && !scope->count(id)) continue;
                selected.push_back(&n);
            }
            json nodes = json::array();
            std::set<NodeId> page;
            for (std::size_t i = offset; i < selected.size() && i < offset + limit; ++i) {
                nodes.push_back(node_summary(*selected[i]));
                page.insert(selected[i]->id);
            }
            json edges = json::array();
            const auto sub = g.induced_subgraph(page);
            for (const auto& e : sub.edges()) edges.push_back(edge_json(e));
            send_json(res, 200,
                      {{"total", selected.size()}, {"offset", offset}, {"limit", limit}, {"nodes", nodes},
                       {"edges", edges}});
        });

        http.Get(R"(/api/systems/([^/]+)/nodes/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto session = session_of(req.matches[1].str(), res);
            if (!session) return;
            const auto& g = session->graph();
            const NodeId id(req.matches[2].str());
            const auto* n = g.find(id);
            if (!n) return send_error(res, 404, "unknown node " + id.str());
            auto body = node_summary(*n);
            if (const auto* src = n->attr(attrs::kSource)) body["source"] = *src;
            body["embedded"] = n->embedding.has_value();
            json in = json::array(), out = json::array();
            for (const auto* e : g.in_edges(id)) in.push_back(edge_json(*e));
            for (const auto* e : g.out_edges(id)) out.push_back(edge_json(*e));
            body["in"] = in;
            body["out"] = out;
            send_json(res, 200, body);
        });

        http.Post(R"(/api/systems/([^/]+)/query)", [this](const httplib::Request& req, httplib::Response& res) {
            auto session = session_of(req.matches[1].str(), res);
            if (!session) return;
            std::string text;
            try {
                text = json::parse(req.body).at("query").get<std::string>();
            } catch (const json::exception&) {
                return send_error(res, 422, "body must be {\"query\": string}");
            }
            try {
                send_json(res, 200, query_rows_json(execute_query(session->graph(), text)));
            } catch (const QueryParseError& e) {
                send_error(res, 400, e.what(), {{"position", e.position()}, {"expected", e.expected()}});
            } catch (const Error& e) {
                send_error(res, 400, e.what());
            }
        });

        http.Post(R"(/api/systems/([^/]+)/chat)", [this](const httplib::Request& req, httplib::Response& res) {
            const auto system_id = req.matches[1].str();
            auto state = find(system_id);
            auto session = session_of(system_id, res);
            if (!session) return;
            std::string question;
            try {
                question = json::parse(req.body).at("question").get<std::string>();
            } catch (const json::exception&) {
                return send_error(res, 422, "body must be {\"question\": string}");
            }
            if (util::trim(question).empty()) return send_error(res, 422, "question must not be empty");
            const auto trace_id = next_trace_id(question);
            res.set_header("X-Trace-Id", trace_id);
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream",
                [this, state, session, question, trace_id](std::size_t, httplib::DataSink& sink) {
                    auto write = [&](const std::string& frame) { return sink.write(frame.data(), frame.size()); };
                    agent::AgentTrace trace;
                    try {
                        trace = session->agent().run(question, trace_id, [&](const agent::AgentStep& step) {
                            write(sse("step", agent::step_to_json(step)));
                        });
                    } catch (const std::exception& e) {
                        trace.trace_id = trace_id;
                        trace.question = question;
                        trace.status = agent::TraceStatus::Error;
                        trace.error = e.what();
                    }
                    store_trace(*state, trace);
                    const json data{{"header", agent::trace_header_json(trace)},
                                    {"final", agent::trace_final_json(trace)}};
                    write(sse(trace.status == agent::TraceStatus::Error ? "error" : "final", data));
                    sink.done();
                    return true;
                });
        });

        http.Get(R"(/api/systems/([^/]+)/traces/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto s = find(req.matches[1].str());
            if (!s) return send_error(res, 404, "unknown system " + req.matches[1].str());
            std::lock_guard lock(s->mutex);
            auto it = s->traces.find(req.matches[2].str());
            if (it == s->traces.end()) return send_error(res, 404, "unknown trace " + req.matches[2].str());
            res.status = 200;
            res.set_content(it->second, "application/x-ndjson");
        });
    }

    std::shared_ptr<Session> session_of(const std::string& id, httplib::Response& res) {
        auto s = find(id);
        if (!s) {
            send_error(res, 404, "unknown system " + id);
            return nullptr;
        }
        std::lock_guard lock(s->mutex);
        if (!s->session) {
            if (s->job && !s->job->finished()) {
                send_error(res, 409, "build in progress", {{"jobId", s->job->id()}});
            } else {
                send_error(res, 404, "system " + id + " has no graph; build it first");
            }
            return nullptr;
        }
        return s->session;
    }

    void store_trace(SystemState& s, const agent::AgentTrace& trace) {
        const auto text = agent::trace_to_jsonl(trace);
        if (options.trace_dir) {
            try {
                agent::save_trace(trace, *options.trace_dir / (trace.trace_id + ".jsonl"));
            } catch (const Error&) {
                // The in-memory copy is still served.
            }
        }
        std::lock_guard lock(s.mutex);
        s.traces[trace.trace_id] = text;
    }
};

ApiServer::ApiServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

ApiServer::~ApiServer() {
    stop();
}

std::string ApiServer::register_system(const SystemConfig& config) {
    return impl_->add(config);
}

bool ApiServer::listen(const std::string& host, int port) {
    return impl_->http.listen(host, port);
}

int ApiServer::bind_any(const std::string& host) {
    return impl_->http.bind_to_any_port(host);
}

bool ApiServer::run() {
    return impl_->http.listen_after_bind();
}

void ApiServer::stop() {
    if (impl_->http.is_running()) impl_->http.stop();
}

void ApiServer::wait_until_ready() const {
    impl_->http.wait_until_ready();
}

} // namespace codegraph::service
