#pragma once

#include <codegraph/agent/action.hpp>
#include <codegraph/agent/tools.hpp>
#include <codegraph/enrich/prompts.hpp>
#include <codegraph/enrich/provider.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace codegraph::agent {

struct AgentBudget {
    std::size_t max_steps = 8;
    std::size_t obs_tokens = 2000;
    int repair_retries = 2;
};

struct AgentStep {
    std::size_t index = 0; // 1-based
    std::string thought;
    std::optional<ToolCall> action;
    std::optional<std::string> final_answer;
    std::string observation;
    std::vector<std::string> diagnostics;
    int repairs = 0;
    bool failed = false;
    std::string raw; // last provider reply for this step

    friend bool operator==(const AgentStep&, const AgentStep&) = default;
};

enum class TraceStatus { Answered, Forced, Error };

std::string_view to_string(TraceStatus status) noexcept;
std::optional<TraceStatus> parse_trace_status(std::string_view text) noexcept;

struct AgentTrace {
    std::string trace_id;
    std::string question;
    std::string system;
    std::string prompt_hash; // hash of the agent prompt template
    std::string initial_prompt;
    std::size_t max_steps = 0;
    std::size_t obs_tokens = 0;
    std::vector<AgentStep> steps;
    std::string final_answer;
    TraceStatus status = TraceStatus::Answered;
    std::string error;
    double wall_ms = 0.0;

    bool forced() const noexcept { return status == TraceStatus::Forced; }
    std::size_t step_count() const noexcept { return steps.size(); }
};

// Record encodings shared by trace files and event streams.
nlohmann::json step_to_json(const AgentStep& step);
AgentStep step_from_json(const nlohmann::json& j);
nlohmann::json trace_header_json(const AgentTrace& trace);
nlohmann::json trace_final_json(const AgentTrace& trace);
void apply_trace_header(AgentTrace& trace, const nlohmann::json& j);
void apply_trace_final(AgentTrace& trace, const nlohmann::json& j);

// Line-delimited JSON: a header record, one record per step, a final record.
std::string trace_to_jsonl(const AgentTrace& trace);
AgentTrace trace_from_jsonl(std::string_view text);
void save_trace(const AgentTrace& trace, const std::filesystem::path& path);
AgentTrace load_trace(const std::filesystem::path& path);

// Re-runs every recorded tool call; element i is the observation for the
// i-th step that carries an action.
std::vector<std::string> replay_observations(const AgentTrace& trace, const Toolbox& tools);

class ReactAgent {
public:
    ReactAgent(const Toolbox& tools, enrich::LlmProvider& provider, AgentBudget budget = {},
               enrich::PromptLibrary prompts = enrich::PromptLibrary::defaults());

    // Never throws for provider trouble: failures end the trace with
    // status Error. on_step fires after each completed step.
    AgentTrace run(std::string_view question, std::string trace_id = {},
                   const std::function<void(const AgentStep&)>& on_step = {}) const;

    std::string build_prompt(std::string_view question, std::string_view history, bool forced = false) const;

private:
    const Toolbox& tools_;
    enrich::LlmProvider& provider_;
    AgentBudget budget_;
    enrich::PromptLibrary prompts_;
};

} // namespace codegraph::agent
