#include <codegraph/service/cli.hpp>

#include <codegraph/eval.hpp>
#include <codegraph/query.hpp>
#include <codegraph/service/pipeline.hpp>
#include <codegraph/service/server.hpp>
#include <codegraph/service/session.hpp>
#include <codegraph/snapshot.hpp>
#include <codegraph/util/text.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

namespace codegraph::service {

namespace {

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case ErrorCode::ConfigError: return kExitConfig;
    case ErrorCode::BuildError: return kExitBuild;
    default: return kExitFailure;
    }
}

SystemConfig config_with_overrides(const std::string& path, const std::string& snapshot) {
    auto config = load_config(path);
    if (!snapshot.empty()) config.snapshot = std::filesystem::absolute(snapshot);
    return config;
}

void print_rows(std::ostream& out, const QueryRows& rows) {
    if (rows.count) {
        out << *rows.count << "\n";
        return;
    }
    out << util::join(rows.columns, "\t") << "\n";
    for (const auto& row : rows.rows) {
        std::vector<std::string> cells;
        for (const auto& id : row) cells.push_back(id.str());
        out << util::join(cells, "\t") << "\n";
    }
}

void print_step(std::ostream& out, const agent::AgentStep& step) {
    out << "[step " << step.index << "]";
    if (!step.thought.empty()) out << " " << step.thought;
    out << "\n";
    if (step.action) out << "  " << step.action->to_wire() << "\n";
    if (step.repairs > 0) out << "  (" << step.repairs << " repair re-prompts)\n";
    if (!step.observation.empty()) {
        for (auto line : util::split_lines(step.observation)) out << "  | " << line << "\n";
    }
}

ApiServer* g_server = nullptr;

extern "C" void handle_signal(int) {
    if (g_server) g_server->stop();
}

} // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Code knowledge graph builder and question answering agent", "cgraph"};
    app.require_subcommand(1);

    std::string config_path;
    std::string snapshot;

    auto* build = app.add_subcommand("build", "Extract, describe and index the configured repositories");
    build->add_option("-c,--config", config_path, "System config file (JSON)")->required();
    build->add_option("--snapshot", snapshot, "Snapshot path, overriding the config");

    auto* query = app.add_subcommand("query", "Run a graph query against the snapshot");
    std::string query_text;
    bool query_json = false;
    query->add_option("-c,--config", config_path, "System config file (JSON)")->required();
    query->add_option("--snapshot", snapshot, "Snapshot path, overriding the config");
    query->add_option("query", query_text, "Query text, e.g. 'MATCH (p:Project) RETURN COUNT'")->required();
    query->add_flag("--json", query_json, "Print rows as JSON");

    auto* chat = app.add_subcommand("chat", "Ask questions; one agent run per input line");
    std::string question;
    std::string trace_dir;
    chat->add_option("-c,--config", config_path, "System config file (JSON)")->required();
    chat->add_option("--snapshot", snapshot, "Snapshot path, overriding the config");
    chat->add_option("-q,--question", question, "Ask a single question and exit");
    chat->add_option("--trace-dir", trace_dir, "Directory for trace files");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("-c,--config", config_path, "System config file to register at start");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port");
    serve->add_option("--trace-dir", trace_dir, "Directory for trace files");

    auto* eval = app.add_subcommand("eval", "Evaluation harness");
    eval->require_subcommand(1);
    auto* eval_run = eval->add_subcommand("run", "Answer every question in a fresh session");
    std::string questions_path, out_dir;
    std::size_t parallel = 1;
    eval_run->add_option("-c,--config", config_path, "System config file (JSON)")->required();
    eval_run->add_option("--snapshot", snapshot, "Snapshot path, overriding the config");
    eval_run->add_option("-q,--questions", questions_path, "questions.jsonl")->required();
    eval_run->add_option("-o,--out", out_dir, "Output directory")->required();
    eval_run->add_option("--parallel", parallel, "Questions answered concurrently");
    auto* eval_report = eval->add_subcommand("report", "Percentage tables from human ratings");
    std::string ratings_path, answers_path;
    bool report_json = false, by_category = false;
    eval_report->add_option("-r,--ratings", ratings_path, "ratings.jsonl")->required();
    eval_report->add_option("-a,--answers", answers_path, "answers.jsonl")->required();
    eval_report->add_flag("--json", report_json, "Print the report as JSON");
    eval_report->add_flag("--by-category", by_category, "Add one table per question category");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*build) {
            auto config = config_with_overrides(config_path, snapshot);
            validate_config(config);
            auto provider = make_provider(config.provider, ProviderUse::Build);
            auto outcome = run_build(config, *provider, [&](BuildPhase p) { err << "phase: " << to_string(p) << "\n"; });
            out << outcome.summary();
            for (const auto& d : outcome.enrichment.diagnostics) err << "warning: " << d << "\n";
            for (const auto& d : outcome.embedding.diagnostics) err << "warning: " << d << "\n";
            if (!config.snapshot.empty()) out << "snapshot: " << config.snapshot.string() << "\n";
            return kExitOk;
        }
        if (*query) {
            auto config = config_with_overrides(config_path, snapshot);
            if (!std::filesystem::exists(config.snapshot)) {
                throw Error(ErrorCode::ConfigError, "snapshot: " + config.snapshot.string() + " not found; run build first");
            }
            const auto graph = load_snapshot(config.snapshot);
            try {
                const auto rows = execute_query(graph, query_text);
                if (query_json) {
                    out << query_rows_json(rows).dump() << "\n";
                } else {
                    print_rows(out, rows);
                }
            } catch (const QueryParseError& e) {
                err << "error: " << e.what();
                if (!e.expected().empty()) err << " (expected " << util::join(e.expected(), ", ") << ")";
                err << "\n";
                return kExitFailure;
            }
            return kExitOk;
        }
        if (*chat) {
            auto config = config_with_overrides(config_path, snapshot);
            auto session = open_session(config);
            auto ask = [&](const std::string& q) {
                auto trace = session->agent().run(q, {}, [&](const agent::AgentStep& s) { print_step(out, s); });
                if (!trace_dir.empty()) agent::save_trace(trace, std::filesystem::path(trace_dir) / (trace.trace_id + ".jsonl"));
                if (trace.status == agent::TraceStatus::Error) {
                    err << "error: " << trace.error << "\n";
                    return false;
                }
                out << (trace.forced() ? "Answer (step budget exhausted): " : "Answer: ") << trace.final_answer << "\n";
                return true;
            };
            if (!question.empty()) return ask(question) ? kExitOk : kExitFailure;
            std::string line;
            out << "> " << std::flush;
            while (std::getline(in, line)) {
                if (!util::trim(line).empty()) ask(std::string(util::trim(line)));
                out << "> " << std::flush;
            }
            out << "\n";
            return kExitOk;
        }
        if (*serve) {
            ServerOptions options;
            if (!trace_dir.empty()) options.trace_dir = trace_dir;
            ApiServer server(options);
            if (!config_path.empty()) {
                const auto id = server.register_system(load_config(config_path));
                out << "registered system " << id << "\n";
            }
            g_server = &server;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            out << "listening on http://" << host << ":" << port << std::endl;
            const bool ok = server.listen(host, port);
            g_server = nullptr;
            if (!ok) {
                err << "error: cannot listen on " << host << ":" << port << "\n";
                return kExitFailure;
            }
            return kExitOk;
        }
        if (*eval_run) {
            auto config = config_with_overrides(config_path, snapshot);
            const auto questions = eval::load_questions(questions_path);
            auto session = open_session(config);
            const auto answers = eval::run_eval(questions, session->agent(), out_dir, parallel);
            std::size_t failed = 0;
            for (const auto& a : answers) {
                if (a.status != "ok") {
                    ++failed;
                    err << "failed: " << a.id << ": " << a.error << "\n";
                }
            }
            out << "answered " << (answers.size() - failed) << "/" << answers.size() << " questions; answers in "
                << (std::filesystem::path(out_dir) / "answers.jsonl").string() << "\n";
            return kExitOk;
        }
        if (*eval_report) {
            const auto report = eval::build_report(eval::load_ratings(ratings_path), eval::load_answers(answers_path));
            if (report_json) {
                out << eval::report_json(report).dump(2) << "\n";
            } else {
                out << eval::report_text(report, by_category);
            }
            for (const auto& w : report.warnings) err << "warning: " << w << "\n";
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << codegraph::to_string(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

} // namespace codegraph::service
