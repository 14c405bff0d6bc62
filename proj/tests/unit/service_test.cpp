#include "http_support.hpp"

#include <codegraph/enrich/provider.hpp>
#include <codegraph/query.hpp>
#include <codegraph/service/config.hpp>
#include <codegraph/service/pipeline.hpp>
#include <codegraph/service/session.hpp>
#include <codegraph/snapshot.hpp>

#include <gtest/gtest.h>

#include <condition_variable>
#include <cstdio>
#include <future>

using namespace cgtest;
using namespace codegraph::service;
using nlohmann::json;

namespace {

// Mock provider whose completions block until the gate opens.
class GatedProvider : public enrich::MockProvider {
public:
    explicit GatedProvider(std::shared_future<void> gate) : gate_(std::move(gate)) {}
    std::string complete(std::string_view prompt, enrich::Tier tier) override {
        gate_.wait();
        return MockProvider::complete(prompt, tier);
    }

private:
    std::shared_future<void> gate_;
};

struct Harness {
    std::promise<void> open;
    std::shared_future<void> gate = open.get_future().share();
    std::vector<std::string> chat_script;

    ServerOptions options() {
        ServerOptions o;
        o.provider_factory = [this](const SystemConfig&, ProviderUse use) -> std::shared_ptr<enrich::LlmProvider> {
            if (use == ProviderUse::Build) return std::make_shared<GatedProvider>(gate);
            if (chat_script.empty()) return std::make_shared<enrich::MockProvider>();
            return std::make_shared<enrich::ScriptedProvider>(chat_script);
        };
        return o;
    }
};

json post_json(httplib::Client& c, const std::string& path, const json& body, int* status) {
    auto res = c.Post(path.c_str(), body.dump(), "application/json");
    if (!res) throw std::runtime_error("no response from " + path);
    *status = res->status;
    return res->body.empty() ? json() : json::parse(res->body);
}

json get_json(httplib::Client& c, const std::string& path, int* status) {
    auto res = c.Get(path.c_str());
    if (!res) throw std::runtime_error("no response from " + path);
    *status = res->status;
    return json::parse(res->body);
}

// Registers the orders fixture and runs a build to completion.
std::string register_and_build(httplib::Client& c, const TempDir& dir, Harness& h) {
    int status = 0;
    const auto doc = service::config_to_json(orders_config(dir / "orders.clgs"));
    const auto id = post_json(c, "/api/systems", doc, &status).at("systemId").get<std::string>();
    EXPECT_EQ(status, 201);
    const auto job = post_json(c, "/api/systems/" + id + "/build", json::object(), &status);
    EXPECT_EQ(status, 202);
    h.open.set_value();
    const auto done = wait_for_job(c, job.at("jobId").get<std::string>());
    EXPECT_EQ(done.at("phase"), "done") << done.dump();
    return id;
}

std::string popen_capture(const std::string& command, int* code) {
    std::string out;
    FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe) return out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    *code = ::pclose(pipe);
    return out;
}

const char* kCountQuery = "MATCH (p:Project) RETURN COUNT";

} // namespace

TEST(Config, RoundTripAndComments) {
    TempDir dir;
    const auto config = orders_config(dir / "x.clgs");
    const auto doc = config_to_json(config);
    EXPECT_EQ(config_to_json(parse_config(doc, "/")), doc);
    EXPECT_EQ(doc["provider"].count("api_key"), 0u);

    write_file(dir / "c.json", "// orders\n{\"system\": \"s\", /* one repo */ \"repos\": [{\"name\": \"r\", \"root\": \"src\", "
                               "\"language\": \"java\"}], \"snapshot\": \"out/s.clgs\"}");
    const auto c = load_config(dir / "c.json");
    EXPECT_EQ(c.repos.at(0).root, dir.path() / "src");
    EXPECT_EQ(c.snapshot, dir.path() / "out" / "s.clgs");
    EXPECT_EQ(c.index.k, 5u);
    EXPECT_DOUBLE_EQ(c.index.threshold, 0.35);
}

TEST(Config, Errors) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {R"({"system":"s","repos":[{"name":"r","root":".","language":"java"}],"colour":1})", "colour"},
        {R"({"repos":[{"name":"r","root":".","language":"java"}]})", "system"},
        {R"({"system":"s","repos":[]})", "repos"},
        {R"({"system":"s","repos":[{"name":"r","root":".","language":"java"}],"index":{"k":0}})", "index.k"},
        {R"({"system":"s","repos":[{"name":"r","root":".","language":"java"}],"index":{"threshold":2}})",
         "index.threshold"},
        {R"({"system":"s","repos":[{"name":"r","root":".","language":"java"}],"provider":{"mode":"magic"}})",
         "provider.mode"},
        {R"({"system":"s","repos":[{"name":"r","root":".","language":"java"}],"provider":{"api_key":"sk-x"}})",
         "provider.api_key"},
        {R"({"system":"s","repos":[{"name":"r","root":".","language":"java"},{"name":"r","root":".","language":"java"}]})", "duplicate"},
    };
    for (const auto& [text, field] : cases) {
        try {
            parse_config(json::parse(text), "/tmp");
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ConfigError) << text;
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
        }
    }
    EXPECT_THROW(load_config("/nonexistent/system.json"), Error);
}

TEST(Config, Validate) {
    auto c = orders_config();
    EXPECT_NO_THROW(validate_config(c));
    c.repos[0].root = "/nonexistent/orders-api";
    try {
        validate_config(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
        EXPECT_NE(std::string(e.what()).find("/nonexistent/orders-api"), std::string::npos);
    }
    c = orders_config();
    c.repos[0].language = "cobol";
    EXPECT_THROW(validate_config(c), Error);
    c = orders_config();
    c.provider.mode = enrich::ProviderMode::Replay;
    EXPECT_THROW(validate_config(c), Error);
    c = orders_config();
    c.provider.mode = enrich::ProviderMode::Live;
    c.provider.endpoint = "http://127.0.0.1:1/v1";
    c.provider.fast_model = c.provider.deep_model = c.provider.embed_model = "m";
    c.provider.api_key_env = "CODEGRAPH_TEST_SURELY_UNSET_KEY";
    EXPECT_THROW(validate_config(c), Error);
}

TEST(BuildJobState, PhasesNeverRegress) {
    BuildJob job("j", "s");
    job.advance(BuildPhase::Describing);
    job.advance(BuildPhase::Structural);
    EXPECT_EQ(job.phase(), BuildPhase::Describing);
    job.advance(BuildPhase::Done);
    job.fail("late");
    EXPECT_EQ(job.phase(), BuildPhase::Done);
    EXPECT_EQ(job.to_json()["phases"], json({"scanning", "describing", "done"}));
    EXPECT_FALSE(job.to_json().contains("error"));
}

TEST(Pipeline, PhasesInOrder) {
    enrich::MockProvider mock;
    std::vector<BuildPhase> seen;
    const auto outcome = run_build(orders_config(), mock, [&](BuildPhase p) { seen.push_back(p); });
    EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
    EXPECT_EQ(seen.front(), BuildPhase::Scanning);
    EXPECT_EQ(seen.back(), BuildPhase::Done);
    EXPECT_EQ(outcome.graph.nodes_of_kind(NodeKind::Project).size(), 3u);
}

TEST(Cli, BuildThenQuery) {
    TempDir dir;
    const auto cfg = write_orders_config(dir).string();
    const auto build = run_cli({"build", "-c", cfg});
    ASSERT_EQ(build.code, 0) << build.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "orders.clgs"));
    EXPECT_NE(build.out.find("Project: 3"), std::string::npos) << build.out;

    const auto count = run_cli({"query", "-c", cfg, kCountQuery});
    EXPECT_EQ(count.code, 0);
    EXPECT_EQ(count.out, "3\n");

    // Rows agree with the in-process query engine on the saved snapshot.
    const std::string q = "MATCH (c:Code)-[:CALLS|DEPENDS_ON]->(d:Code) RETURN c, d";
    const auto rows = run_cli({"query", "-c", cfg, "--json", q});
    ASSERT_EQ(rows.code, 0);
    EXPECT_EQ(json::parse(rows.out), query_rows_json(execute_query(load_snapshot(dir / "orders.clgs"), q)));

    const auto bad = run_cli({"query", "-c", cfg, "MATCH (p:Project RETURN p"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("position 17"), std::string::npos) << bad.err;
}

TEST(Cli, ExitCodes) {
    TempDir dir;
    const auto missing = write_orders_config(
        dir, {{"repos", json::array({json{{"name", "ghost"}, {"root", (dir / "no-such-repo").string()}, {"language", "java"}}})}});
    const auto r = run_cli({"build", "-c", missing.string()});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find((dir / "no-such-repo").string()), std::string::npos) << r.err;

    EXPECT_EQ(run_cli({"build", "-c", (dir / "absent.json").string()}).code, kExitConfig);
    EXPECT_EQ(run_cli({"query", "-c", missing.string(), kCountQuery}).code, kExitConfig);
    EXPECT_NE(run_cli({"frobnicate"}).code, 0);

    // A replay transcript recorded for another system misses: build error.
    TempDir twins;
    auto tw = load_config(fixtures_dir() / "twins" / "system.json");
    auto doc = config_to_json(tw);
    doc["snapshot"] = (twins / "t.clgs").string();
    doc["provider"]["transcript"] = (twins / "t.transcript").string();
    write_file(twins / "system.json", doc.dump());
    ASSERT_EQ(run_cli({"build", "-c", (twins / "system.json").string()}).code, 0);
    const auto replay = write_orders_config(
        dir, {{"provider", {{"mode", "replay"}, {"transcript", (twins / "t.transcript").string()}}}});
    const auto miss = run_cli({"build", "-c", replay.string()});
    EXPECT_EQ(miss.code, kExitBuild) << miss.err;
    EXPECT_NE(miss.err.find("ReplayMiss"), std::string::npos) << miss.err;
}

TEST(Cli, ChatAndEval) {
    TempDir dir;
    const auto cfg = write_orders_config(dir).string();
    ASSERT_EQ(run_cli({"build", "-c", cfg}).code, 0);
    const auto chat = run_cli({"chat", "-c", cfg, "--trace-dir", (dir / "traces").string()},
                              "Which components handle the order?\n\n");
    EXPECT_EQ(chat.code, 0);
    EXPECT_NE(chat.out.find("Answer: Relevant components"), std::string::npos) << chat.out;
    EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir / "traces"), {}), 1);

    write_file(dir / "q.jsonl", "{\"id\":\"q1\",\"category\":\"factual\",\"text\":\"Which class processes the order?\"}\n");
    const auto run = run_cli({"eval", "run", "-c", cfg, "-q", (dir / "q.jsonl").string(), "-o", (dir / "out").string()});
    ASSERT_EQ(run.code, 0) << run.err;
    write_file(dir / "r.jsonl",
               "{\"questionId\":\"q1\",\"accuracy\":\"high\",\"completeness\":\"medium\",\"coherence\":\"high\"}\n");
    const auto report = run_cli({"eval", "report", "-r", (dir / "r.jsonl").string(), "-a", (dir / "out" / "answers.jsonl").string()});
    EXPECT_EQ(report.code, 0);
    EXPECT_NE(report.out.find("Accuracy           100.0         0.0      0.0"), std::string::npos) << report.out;
    write_file(dir / "empty.jsonl", "");
    const auto none = run_cli({"eval", "report", "-r", (dir / "empty.jsonl").string(), "-a",
                               (dir / "out" / "answers.jsonl").string()});
    EXPECT_EQ(none.code, 1);
    EXPECT_NE(none.err.find("no ratings"), std::string::npos);
}

TEST(Cli, Binary) {
#ifndef CODEGRAPH_CLI_PATH
    GTEST_SKIP() << "cgraph is not part of this build";
#else
    TempDir dir;
    const auto cfg = write_orders_config(dir).string();
    int code = -1;
    popen_capture(std::string(CODEGRAPH_CLI_PATH) + " build -c '" + cfg + "' 2>/dev/null", &code);
    ASSERT_EQ(code, 0);
    const auto out = popen_capture(std::string(CODEGRAPH_CLI_PATH) + " query -c '" + cfg + "' '" + kCountQuery + "'", &code);
    EXPECT_EQ(code, 0);
    EXPECT_EQ(out, "3\n");
    popen_capture(std::string(CODEGRAPH_CLI_PATH) + " build -c /nonexistent.json 2>/dev/null", &code);
    EXPECT_EQ(WEXITSTATUS(code), kExitConfig);
#endif
}

TEST(Http, RegisterValidation) {
    Harness h;
    ServerThread srv(h.options());
    auto c = srv.client();
    int status = 0;
    auto res = c.Post("/api/systems", "{not json", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 422);
    const auto body = post_json(c, "/api/systems", {{"system", "s"}, {"colour", 1}, {"repos", json::array()}}, &status);
    EXPECT_EQ(status, 422);
    EXPECT_EQ(body["code"], "ConfigError");

    post_json(c, "/api/systems/nope/build", json::object(), &status);
    EXPECT_EQ(status, 404);
    get_json(c, "/api/jobs/job-999", &status);
    EXPECT_EQ(status, 404);
    get_json(c, "/api/systems/nope/graph", &status);
    EXPECT_EQ(status, 404);

    // A registered system whose repo is gone: the build is rejected at once.
    auto doc = config_to_json(orders_config());
    doc["repos"][0]["root"] = "/nonexistent/repo";
    const auto id = post_json(c, "/api/systems", doc, &status)["systemId"].get<std::string>();
    EXPECT_EQ(status, 201);
    const auto rejected = post_json(c, "/api/systems/" + id + "/build", json::object(), &status);
    EXPECT_EQ(status, 422);
    EXPECT_EQ(wait_for_job(c, rejected["jobId"].get<std::string>())["phase"], "failed");
    h.open.set_value();
}

TEST(Http, BuildConflictAndBrowse) {
    Harness h;
    ServerThread srv(h.options());
    auto c = srv.client();
    TempDir dir;
    int status = 0;
    const auto id =
        post_json(c, "/api/systems", config_to_json(orders_config(dir / "orders.clgs")), &status)["systemId"].get<std::string>();
    ASSERT_EQ(status, 201);
    EXPECT_EQ(id, "orders-system");
    get_json(c, "/api/systems/" + id + "/graph", &status);
    EXPECT_EQ(status, 404);

    const auto job = post_json(c, "/api/systems/" + id + "/build", json::object(), &status)["jobId"].get<std::string>();
    EXPECT_EQ(status, 202);
    const auto second = post_json(c, "/api/systems/" + id + "/build", json::object(), &status);
    EXPECT_EQ(status, 409);
    EXPECT_EQ(second["jobId"], job);
    get_json(c, "/api/systems/" + id + "/graph", &status);
    EXPECT_EQ(status, 409);
    post_json(c, "/api/systems/" + id + "/query", {{"query", kCountQuery}}, &status);
    EXPECT_EQ(status, 409);

    std::vector<std::string> phases;
    h.open.set_value();
    const auto done = wait_for_job(c, job, &phases);
    EXPECT_EQ(done["phase"], "done");
    const std::vector<std::string> order{"scanning", "structural", "describing", "entities", "embedding", "done"};
    EXPECT_EQ(done["phases"].get<std::vector<std::string>>(), order);
    std::size_t at = 0;
    for (const auto& p : phases) {
        const auto it = std::find(order.begin(), order.end(), p);
        ASSERT_NE(it, order.end());
        EXPECT_GE(static_cast<std::size_t>(it - order.begin()), at);
        at = static_cast<std::size_t>(it - order.begin());
    }
    EXPECT_EQ(done["counters"]["nodes"], 9);
    EXPECT_TRUE(std::filesystem::exists(dir / "orders.clgs"));

    auto g = get_json(c, "/api/systems/" + id + "/graph", &status);
    EXPECT_EQ(status, 200);
    EXPECT_EQ(g["total"], 9);
    g = get_json(c, "/api/systems/" + id + "/graph?kind=Project", &status);
    EXPECT_EQ(g["total"], 3);
    EXPECT_TRUE(g["edges"].empty());
    g = get_json(c, "/api/systems/" + id + "/graph?projectId=project:orders-api", &status);
    EXPECT_EQ(g["total"], 3);
    EXPECT_EQ(g["edges"].size(), 3u);
    g = get_json(c, "/api/systems/" + id + "/graph?limit=4&offset=8", &status);
    EXPECT_EQ(g["nodes"].size(), 1u);
    get_json(c, "/api/systems/" + id + "/graph?limit=0", &status);
    EXPECT_EQ(status, 422);
    get_json(c, "/api/systems/" + id + "/graph?kind=Widget", &status);
    EXPECT_EQ(status, 422);
    get_json(c, "/api/systems/" + id + "/graph?projectId=project:nope", &status);
    EXPECT_EQ(status, 404);

    const auto node = get_json(c, "/api/systems/" + id + "/nodes/com.acme.orders.manager.OrderProcessor", &status);
    EXPECT_EQ(status, 200);
    EXPECT_EQ(node["kind"], "Code");
    EXPECT_NE(node["source"].get<std::string>().find("public class OrderProcessor"), std::string::npos);
    EXPECT_EQ(node["description"], "Summary of OrderProcessor: order processor class in orders-manager.");
    const auto entity = get_json(c, "/api/systems/" + id + "/nodes/entity:Order", &status);
    EXPECT_EQ(entity["in"].size(), 4u);
    EXPECT_FALSE(entity.contains("source"));
    get_json(c, "/api/systems/" + id + "/nodes/no.such.Node", &status);
    EXPECT_EQ(status, 404);
}

TEST(Http, QueryParityWithCli) {
    Harness h;
    ServerThread srv(h.options());
    auto c = srv.client();
    TempDir dir;
    const auto id = register_and_build(c, dir, h);
    const auto cfg = write_orders_config(dir).string();
    int status = 0;
    for (const std::string q : {"MATCH (p:Project) RETURN COUNT", "MATCH (p:Project) RETURN p",
                                "MATCH (x:Widget) RETURN x", "MATCH (a)-[*1..3]->(b:Entity) RETURN a, b",
                                "MATCH (p:Project {name: \"orders-api\"})-[:CONTAINS]->(c) RETURN c"}) {
        const auto http = post_json(c, "/api/systems/" + id + "/query", {{"query", q}}, &status);
        EXPECT_EQ(status, 200) << q;
        const auto cli = run_cli({"query", "-c", cfg, "--json", q});
        ASSERT_EQ(cli.code, 0) << cli.err;
        EXPECT_EQ(json::parse(cli.out), http) << q;
    }
    const auto err = post_json(c, "/api/systems/" + id + "/query", {{"query", "MATCH (p:Project RETURN p"}}, &status);
    EXPECT_EQ(status, 400);
    EXPECT_EQ(err["position"], 17);
    const auto cli = run_cli({"query", "-c", cfg, "MATCH (p:Project RETURN p"});
    EXPECT_NE(cli.err.find(err["error"].get<std::string>()), std::string::npos) << cli.err;
    post_json(c, "/api/systems/" + id + "/query", {{"q", 1}}, &status);
    EXPECT_EQ(status, 422);
}

TEST(Http, ChatStreamReconstructsTrace) {
    Harness h;
    h.chat_script = {"Thought: projects first\nACTION projects_tool {\"query\":\"orders-api structure\"}",
                     "ACTION entities_tool {\"query\":\"order\"}", "nonsense", "ACTION source_tool {\"id\":\"entity:Order\"}",
                     "FINAL: orders-api and orders-manager are involved."};
    ServerThread srv(h.options());
    auto c = srv.client();
    TempDir dir;
    const auto id = register_and_build(c, dir, h);

    auto res = c.Post(("/api/systems/" + id + "/chat").c_str(),
                      json{{"question", "Which projects are involved in the order process?"}}.dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "text/event-stream");
    const auto trace_id = res->get_header_value("X-Trace-Id");
    const auto events = parse_sse(res->body);
    ASSERT_EQ(events.size(), 5u);
    EXPECT_EQ(events.back().event, "final");
    EXPECT_EQ(events.back().data["final"]["steps"], 4);
    EXPECT_EQ(events.back().data["final"]["answer"], "orders-api and orders-manager are involved.");
    EXPECT_EQ(events[2].data["repairs"], 1);
    EXPECT_EQ(events[2].data["observation"].get<std::string>().rfind("TOOL ERROR: NotACodeNode", 0), 0u);

    int status = 0;
    auto stored = c.Get(("/api/systems/" + id + "/traces/" + trace_id).c_str());
    ASSERT_TRUE(stored);
    EXPECT_EQ(stored->status, 200);
    EXPECT_EQ(trace_from_events(events), stored->body);
    const auto trace = agent::trace_from_jsonl(stored->body);
    EXPECT_EQ(trace.steps.size(), 4u);
    EXPECT_EQ(agent::trace_to_jsonl(trace), stored->body);

    get_json(c, "/api/systems/" + id + "/traces/nope", &status);
    EXPECT_EQ(status, 404);
    post_json(c, "/api/systems/" + id + "/chat", {{"question", "  "}}, &status);
    EXPECT_EQ(status, 422);
}

TEST(Http, ChatProviderFailureStreamsError) {
    Harness h;
    h.chat_script = {"ACTION entities_tool {\"query\":\"order\"}"};
    ServerThread srv(h.options());
    auto c = srv.client();
    TempDir dir;
    const auto id = register_and_build(c, dir, h);
    auto res = c.Post(("/api/systems/" + id + "/chat").c_str(), json{{"question", "q"}}.dump(), "application/json");
    ASSERT_TRUE(res);
    const auto events = parse_sse(res->body);
    ASSERT_EQ(events.size(), 2u);
    EXPECT_EQ(events[1].event, "error");
    EXPECT_EQ(events[1].data["final"]["status"], "error");
}

TEST(Http, SnapshotLoadsOnRegister) {
    TempDir dir;
    enrich::MockProvider mock;
    run_build(orders_config(dir / "orders.clgs"), mock);
    ServerThread srv;
    const auto id = srv.server().register_system(orders_config(dir / "orders.clgs"));
    auto c = srv.client();
    int status = 0;
    const auto body = post_json(c, "/api/systems/" + id + "/query", {{"query", kCountQuery}}, &status);
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body, json({{"count", 3}}));
    // Registering the same config again returns the same id.
    EXPECT_EQ(srv.server().register_system(orders_config(dir / "orders.clgs")), id);
}
