#include <codegraph/agent/action.hpp>

#include <codegraph/error.hpp>
#include <codegraph/util/text.hpp>

namespace codegraph::agent {

using json = nlohmann::json;

std::string_view to_string(ToolName tool) noexcept {
    switch (tool) {
    case ToolName::Projects: return "projects_tool";
    case ToolName::Entities: return "entities_tool";
    case ToolName::Codes: return "codes_tool";
    case ToolName::GraphQuery: return "graph_query_tool";
    case ToolName::Source: return "source_tool";
    }
    return "projects_tool";
}

std::optional<ToolName> parse_tool_name(std::string_view name) noexcept {
    if (util::ends_with(name, "_tool")) name.remove_suffix(5);
    if (name == "projects") return ToolName::Projects;
    if (name == "entities") return ToolName::Entities;
    if (name == "codes") return ToolName::Codes;
    if (name == "graph_query") return ToolName::GraphQuery;
    if (name == "source") return ToolName::Source;
    return std::nullopt;
}

std::string ToolCall::to_wire() const {
    return "ACTION " + std::string(to_string(tool)) + " " + args.dump();
}

namespace {

[[noreturn]] void malformed(const std::string& message) {
    throw Error(ErrorCode::MalformedAction, message);
}

void require_string(const json& args, const char* key) {
    if (!args.contains(key) || !args[key].is_string() || util::trim(args[key].get<std::string>()).empty()) {
        malformed(std::string("argument \"") + key + "\" must be a non-empty string");
    }
}

} // namespace

void validate_args(ToolName tool, const json& args) {
    if (!args.is_object()) malformed("arguments must be a JSON object");
    switch (tool) {
    case ToolName::Projects:
    case ToolName::Entities:
    case ToolName::Codes:
        require_string(args, "query");
        if (args.contains("k") && !(args["k"].is_number_integer() && args["k"].get<long long>() >= 1)) {
            malformed("argument \"k\" must be a positive integer");
        }
        if (args.contains("threshold") &&
            !(args["threshold"].is_number() && args["threshold"].get<double>() >= -1.0 &&
              args["threshold"].get<double>() <= 1.0)) {
            malformed("argument \"threshold\" must be a number in [-1, 1]");
        }
        break;
    case ToolName::GraphQuery:
        require_string(args, "query");
        break;
    case ToolName::Source:
        require_string(args, "id");
        break;
    }
}

ParsedAction parse_action(std::string_view text) {
    std::string first_problem;
    std::size_t offset = 0;
    while (offset <= text.size()) {
        auto eol = text.find('\n', offset);
        if (eol == std::string_view::npos) eol = text.size();
        const auto line = util::trim(text.substr(offset, eol - offset));
        const auto thought = [&] { return std::string(util::trim(text.substr(0, offset))); };

        if (util::starts_with(line, "FINAL:")) {
            const auto line_start = text.find("FINAL:", offset);
            auto answer = std::string(util::trim(text.substr(line_start + 6)));
            if (!answer.empty()) return {thought(), FinalAnswer{std::move(answer)}};
            if (first_problem.empty()) first_problem = "FINAL: without an answer";
        } else if (util::starts_with(line, "ACTION ")) {
            auto rest = util::trim(line.substr(7));
            const auto space = rest.find_first_of(" \t");
            const auto name = rest.substr(0, space);
            const auto args_text = space == std::string_view::npos ? std::string_view{} : util::trim(rest.substr(space));
            try {
                const auto tool = parse_tool_name(name);
                if (!tool) malformed("unknown tool \"" + std::string(name) + "\"");
                json args;
                try {
                    args = args_text.empty() ? json::object() : json::parse(args_text);
                } catch (const json::parse_error& e) {
                    malformed(std::string("arguments are not valid JSON: ") + e.what());
                }
                validate_args(*tool, args);
                return {thought(), ToolCall{*tool, std::move(args)}};
            } catch (const Error& e) {
                if (first_problem.empty()) first_problem = e.what();
            }
        }
        if (eol == text.size()) break;
        offset = eol + 1;
    }
    malformed(first_problem.empty() ? "no ACTION or FINAL: line found" : first_problem);
}

} // namespace codegraph::agent
