#include <codegraph/agent/agent.hpp>

#include <codegraph/util/text.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace codegraph::agent {

using json = nlohmann::json;

std::string_view to_string(TraceStatus status) noexcept {
    switch (status) {
    case TraceStatus::Answered: return "answered";
    case TraceStatus::Forced: return "forced";
    case TraceStatus::Error: return "error";
    }
    return "error";
}

std::optional<TraceStatus> parse_trace_status(std::string_view text) noexcept {
    if (text == "answered") return TraceStatus::Answered;
    if (text == "forced") return TraceStatus::Forced;
    if (text == "error") return TraceStatus::Error;
    return std::nullopt;
}

ReactAgent::ReactAgent(const Toolbox& tools, enrich::LlmProvider& provider, AgentBudget budget,
                       enrich::PromptLibrary prompts)
    : tools_(tools), provider_(provider), budget_(budget), prompts_(std::move(prompts)) {
    if (budget_.max_steps == 0) throw Error(ErrorCode::InvalidArgument, "max_steps must be at least 1");
}

namespace {

std::string fmt_threshold(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::string history_entry(const AgentStep& step) {
    std::string out = "\n";
    if (!step.thought.empty()) out += "Thought: " + step.thought + "\n";
    if (step.action) {
        out += "Action: " + step.action->to_wire() + "\n";
    } else if (step.failed) {
        out += "Action: (invalid)\n";
    }
    out += "Observation:\n" + step.observation + "\n";
    return out;
}

} // namespace

std::string ReactAgent::build_prompt(std::string_view question, std::string_view history, bool forced) const {
    const auto& g = tools_.graph();
    const auto sys = g.system_id();
    const Node* system = sys ? g.find(*sys) : nullptr;
    return enrich::render(prompts_.get(forced ? "agent_final" : "agent").text,
                          {{"system", system ? system->name : g.system_name()},
                           {"system_description", system && system->description ? *system->description : ""},
                           {"k", std::to_string(tools_.index().defaults().k)},
                           {"threshold", fmt_threshold(tools_.index().defaults().threshold)},
                           {"question", std::string(question)},
                           {"history", std::string(history)}});
}

AgentTrace ReactAgent::run(std::string_view question, std::string trace_id,
                           const std::function<void(const AgentStep&)>& on_step) const {
    const auto started = std::chrono::steady_clock::now();
    AgentTrace trace;
    trace.trace_id = trace_id.empty() ? util::hash_hex(question) : std::move(trace_id);
    trace.question = std::string(question);
    trace.system = tools_.graph().system_name();
    trace.prompt_hash = prompts_.get("agent").hash();
    trace.initial_prompt = build_prompt(question, "");
    trace.max_steps = budget_.max_steps;
    trace.obs_tokens = budget_.obs_tokens;

    auto finish = [&](TraceStatus status) {
        trace.status = status;
        trace.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        return trace;
    };
    auto ask = [&](const std::string& prompt) {
        return enrich::with_retries(enrich::RetryPolicy{}, [&] { return provider_.complete(prompt, enrich::Tier::Deep); });
    };

    std::string history;
    try {
        for (std::size_t i = 1; i <= budget_.max_steps; ++i) {
            AgentStep step;
            step.index = i;
            const auto prompt = build_prompt(question, history);
            std::string reply = ask(prompt);
            std::optional<ParsedAction> parsed;
            for (;;) {
                step.raw = reply;
                try {
                    parsed = parse_action(reply);
                    break;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::MalformedAction) throw;
                    step.diagnostics.push_back(std::string("malformed action: ") + e.what());
                    if (step.repairs >= budget_.repair_retries) break;
                    ++step.repairs;
                    reply = ask(prompt + "\nYour previous reply was not a valid step (" + e.what() +
                                "). Reply with one line ACTION <tool> <json arguments> or FINAL: <answer>.\n");
                }
            }
            if (!parsed) {
                step.failed = true;
                step.observation = "MALFORMED ACTION: " + step.diagnostics.back();
            } else if (auto* fin = std::get_if<FinalAnswer>(&parsed->action)) {
                step.thought = parsed->thought;
                step.final_answer = fin->text;
                trace.final_answer = fin->text;
                trace.steps.push_back(step);
                if (on_step) on_step(trace.steps.back());
                return finish(TraceStatus::Answered);
            } else {
                step.thought = parsed->thought;
                step.action = std::get<ToolCall>(parsed->action);
                auto result = tools_.invoke(*step.action);
                step.observation = std::move(result.payload);
                step.diagnostics.insert(step.diagnostics.end(), result.diagnostics.begin(), result.diagnostics.end());
            }
            history += history_entry(step);
            trace.steps.push_back(std::move(step));
            if (on_step) on_step(trace.steps.back());
        }

        const auto reply = ask(build_prompt(question, history, true));
        try {
            auto parsed = parse_action(reply);
            if (auto* fin = std::get_if<FinalAnswer>(&parsed.action)) {
                trace.final_answer = fin->text;
            } else {
                trace.final_answer = std::string(util::trim(reply));
            }
        } catch (const Error&) {
            trace.final_answer = std::string(util::trim(reply));
        }
        return finish(TraceStatus::Forced);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderFailure && e.code() != ErrorCode::ReplayMiss) throw;
        trace.error = std::string(codegraph::to_string(e.code())) + ": " + e.what();
        return finish(TraceStatus::Error);
    }
}

json step_to_json(const AgentStep& s) {
    json j{{"type", "step"},
           {"index", s.index},
           {"thought", s.thought},
           {"observation", s.observation},
           {"diagnostics", s.diagnostics},
           {"repairs", s.repairs},
           {"failed", s.failed},
           {"raw", s.raw}};
    j["action"] = s.action ? json{{"tool", to_string(s.action->tool)}, {"args", s.action->args}} : json(nullptr);
    j["final"] = s.final_answer ? json(*s.final_answer) : json(nullptr);
    return j;
}

AgentStep step_from_json(const json& j) {
    AgentStep s;
    s.index = j.at("index").get<std::size_t>();
    s.thought = j.at("thought").get<std::string>();
    s.observation = j.at("observation").get<std::string>();
    s.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    s.repairs = j.at("repairs").get<int>();
    s.failed = j.at("failed").get<bool>();
    s.raw = j.at("raw").get<std::string>();
    if (!j.at("action").is_null()) {
        const auto tool = parse_tool_name(j["action"].at("tool").get<std::string>());
        if (!tool) throw Error(ErrorCode::ParseError, "unknown tool in trace");
        s.action = ToolCall{*tool, j["action"].at("args")};
    }
    if (!j.at("final").is_null()) s.final_answer = j["final"].get<std::string>();
    return s;
}

json trace_header_json(const AgentTrace& t) {
    return json{{"type", "header"},
                {"trace_id", t.trace_id},
                {"question", t.question},
                {"system", t.system},
                {"prompt_hash", t.prompt_hash},
                {"initial_prompt", t.initial_prompt},
                {"max_steps", t.max_steps},
                {"obs_tokens", t.obs_tokens}};
}

json trace_final_json(const AgentTrace& t) {
    return json{{"type", "final"},
                {"answer", t.final_answer},
                {"status", to_string(t.status)},
                {"forced", t.forced()},
                {"error", t.error},
                {"steps", t.steps.size()},
                {"wall_ms", t.wall_ms}};
}

void apply_trace_header(AgentTrace& t, const json& j) {
    t.trace_id = j.at("trace_id").get<std::string>();
    t.question = j.at("question").get<std::string>();
    t.system = j.at("system").get<std::string>();
    t.prompt_hash = j.at("prompt_hash").get<std::string>();
    t.initial_prompt = j.at("initial_prompt").get<std::string>();
    t.max_steps = j.at("max_steps").get<std::size_t>();
    t.obs_tokens = j.at("obs_tokens").get<std::size_t>();
}

void apply_trace_final(AgentTrace& t, const json& j) {
    t.final_answer = j.at("answer").get<std::string>();
    const auto status = parse_trace_status(j.at("status").get<std::string>());
    if (!status) throw Error(ErrorCode::ParseError, "unknown trace status");
    t.status = *status;
    t.error = j.at("error").get<std::string>();
    t.wall_ms = j.at("wall_ms").get<double>();
}

std::string trace_to_jsonl(const AgentTrace& t) {
    std::string out = trace_header_json(t).dump() + "\n";
    for (const auto& s : t.steps) out += step_to_json(s).dump() + "\n";
    out += trace_final_json(t).dump() + "\n";
    return out;
}

AgentTrace trace_from_jsonl(std::string_view text) {
    AgentTrace t;
    bool header = false;
    bool final = false;
    std::size_t lineno = 0;
    for (auto line : util::split_lines(text)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "header") {
                apply_trace_header(t, j);
                header = true;
            } else if (type == "step") {
                t.steps.push_back(step_from_json(j));
            } else if (type == "final") {
                apply_trace_final(t, j);
                final = true;
            } else {
                throw Error(ErrorCode::ParseError, "unknown record type " + type);
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header || !final) throw Error(ErrorCode::ParseError, "trace is missing its header or final record");
    return t;
}

void save_trace(const AgentTrace& trace, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write trace " + path.string());
    out << trace_to_jsonl(trace);
}

AgentTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read trace " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return trace_from_jsonl(buf.str());
}

std::vector<std::string> replay_observations(const AgentTrace& trace, const Toolbox& tools) {
    std::vector<std::string> out;
    for (const auto& s : trace.steps) {
        if (s.action) out.push_back(tools.invoke(*s.action).payload);
    }
    return out;
}

} // namespace codegraph::agent
