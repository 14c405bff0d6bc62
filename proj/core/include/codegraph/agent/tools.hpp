#pragma once

#include <codegraph/agent/action.hpp>
#include <codegraph/graph.hpp>
#include <codegraph/index.hpp>

#include <optional>
#include <string>
#include <vector>

namespace codegraph::agent {

inline constexpr std::string_view kTruncationMarker = "[TRUNCATED]";
inline constexpr std::string_view kEmptyResult = "(empty result)";

struct ToolResult {
    std::string tool;
    std::string payload;
    std::size_t token_estimate = 0;
    std::vector<std::string> diagnostics;
    bool truncated = false;
};

// One line per node "[Kind] id: name <U+2014> first sentence", then one line per
// edge "src -LABEL-> dst"; nodes by (kind, id), edges by (src, label, dst).
std::string render_subgraph(const Subgraph& subgraph);

// First sentence of a description, newlines folded.
std::string first_sentence(std::string_view text);

// Cuts text so its token estimate fits the budget, ending with the marker.
std::string fit_budget(std::string text, std::size_t max_tokens, bool* truncated = nullptr);

// The retrieval tools over a built and indexed graph. Thread-safe.
class Toolbox {
public:
    Toolbox(const CodeGraph& graph, const index::SemanticIndex& index, std::size_t obs_tokens = 2000);

    const CodeGraph& graph() const noexcept { return graph_; }
    const index::SemanticIndex& index() const noexcept { return index_; }
    std::size_t obs_tokens() const noexcept { return obs_tokens_; }

    // Subgraph pipelines; diagnostics are appended to `notes` when given.
    Subgraph projects_subgraph(std::string_view query, std::size_t k, double threshold,
                               std::vector<std::string>* notes = nullptr) const;
    Subgraph entities_subgraph(std::string_view query, std::size_t k, double threshold,
                               std::vector<std::string>* notes = nullptr) const;
    Subgraph codes_subgraph(std::string_view query, std::size_t k, double threshold,
                            std::vector<std::string>* notes = nullptr) const;

    ToolResult projects(std::string_view query, std::optional<std::size_t> k = {},
                        std::optional<double> threshold = {}) const;
    ToolResult entities(std::string_view query, std::optional<std::size_t> k = {},
                        std::optional<double> threshold = {}) const;
    ToolResult codes(std::string_view query, std::optional<std::size_t> k = {},
                     std::optional<double> threshold = {}) const;
    ToolResult graph_query(std::string_view text) const;
    // Throws UnknownId, NotACodeNode.
    ToolResult source(const NodeId& id) const;

    // Dispatches a call; tool errors become an observation starting with
    // "TOOL ERROR:" instead of propagating.
    ToolResult invoke(const ToolCall& call) const;

private:
    ToolResult finish(std::string tool, std::string payload, std::vector<std::string> notes) const;

    const CodeGraph& graph_;
    const index::SemanticIndex& index_;
    std::size_t obs_tokens_;
};

} // namespace codegraph::agent
