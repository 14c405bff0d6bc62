#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace codegraph::agent {

enum class ToolName { Projects, Entities, Codes, GraphQuery, Source };

// Canonical wire name, e.g. "projects_tool".
std::string_view to_string(ToolName tool) noexcept;
// Accepts the wire name with or without the "_tool" suffix.
std::optional<ToolName> parse_tool_name(std::string_view name) noexcept;

struct ToolCall {
    ToolName tool = ToolName::Projects;
    nlohmann::json args = nlohmann::json::object();

    std::string to_wire() const; // "ACTION <tool> <json>"
    friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct FinalAnswer {
    std::string text;
    friend bool operator==(const FinalAnswer&, const FinalAnswer&) = default;
};

struct ParsedAction {
    std::string thought;
    std::variant<ToolCall, FinalAnswer> action;
};

// Throws MalformedAction when args do not fit the tool's schema.
void validate_args(ToolName tool, const nlohmann::json& args);

// Finds the first well-formed "ACTION <tool> <json>" line or "FINAL:" block;
// text before it is the thought. Throws MalformedAction when there is none.
ParsedAction parse_action(std::string_view text);

} // namespace codegraph::agent
