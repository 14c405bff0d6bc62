#pragma once

#include <codegraph/enrich/prompts.hpp>
#include <codegraph/enrich/provider.hpp>
#include <codegraph/graph.hpp>

#include <functional>
#include <string>
#include <vector>

namespace codegraph::enrich {

struct EntityOperation {
    std::string code_uid;
    std::string verb;

    friend auto operator<=>(const EntityOperation&, const EntityOperation&) = default;
};

struct ExtractedEntity {
    std::string name;
    std::string description;
    std::vector<EntityOperation> operations;
    std::vector<std::string> represented_by;

    friend bool operator==(const ExtractedEntity&, const ExtractedEntity&) = default;
};

struct EntityExtraction {
    std::vector<ExtractedEntity> entities;
    std::vector<std::string> diagnostics;
};

struct ProjectExtraction {
    NodeId project;
    EntityExtraction extraction;
};

struct EnrichOptions {
    std::size_t parallelism = 4;
    RetryPolicy retry{};
    int repair_retries = 2;
    PromptLibrary prompts = PromptLibrary::defaults();
};

inline constexpr std::string_view kEmptyCodeDescription = "Empty code unit.";
inline constexpr std::string_view kEmptyProjectDescription = "Empty project.";

// trim, collapse spaces, naive singular of the last word, title case.
std::string normalize_entity_name(std::string_view raw);
NodeId entity_node_id(std::string_view normalized_name);

// Each describe_* stores the description on the node and returns it. A
// provider failure after retries marks the node degraded and returns "".
std::string describe_code(CodeGraph& graph, const NodeId& code, LlmProvider& provider,
                          const EnrichOptions& options = {});
std::string describe_project(CodeGraph& graph, const NodeId& project, LlmProvider& provider,
                             const EnrichOptions& options = {});
std::string describe_system(CodeGraph& graph, LlmProvider& provider, const EnrichOptions& options = {});

// Prompt text for a node; exposed for determinism checks.
std::string build_code_prompt(const CodeGraph& graph, const NodeId& code, const PromptLibrary& prompts);
std::string build_project_prompt(const CodeGraph& graph, const NodeId& project, const PromptLibrary& prompts);
std::string build_system_prompt(const CodeGraph& graph, const PromptLibrary& prompts);
std::string build_entities_prompt(const CodeGraph& graph, const NodeId& project, const PromptLibrary& prompts);

// Validates a raw provider response against the graph: JSON shape, verb
// syntax, reserved labels, code uid existence. Throws MalformedExtraction
// only when the text is not a JSON object of the expected shape.
EntityExtraction parse_extraction(std::string_view response, const CodeGraph& graph);

// One deep-tier call per project with up to repair_retries re-prompts on
// malformed JSON; gives up with an empty extraction and a diagnostic.
EntityExtraction extract_entities(const CodeGraph& graph, const NodeId& project, LlmProvider& provider,
                                  const EnrichOptions& options = {});

std::vector<ExtractedEntity> merge_entities(std::vector<ProjectExtraction> per_project);

// Adds Entity nodes, verb and REPRESENTS edges, and RELATES_TO edges to every
// project holding code linked to the entity. Idempotent.
void apply_semantic_layer(CodeGraph& graph, const std::vector<ExtractedEntity>& entities);

// Empty when every RELATES_TO edge is justified by incident code and every
// justified pair has its edge; otherwise one message per breach.
std::vector<std::string> check_relates_to(const CodeGraph& graph);

enum class EnrichStage { Describing, Entities };

struct EnrichReport {
    std::size_t described = 0;
    std::size_t degraded = 0;
    std::size_t entities = 0;
    std::vector<std::string> diagnostics;
};

// Code descriptions (parallel, fast tier) -> project descriptions -> system
// description -> per-project entity extraction -> merge -> semantic layer.
EnrichReport enrich_graph(CodeGraph& graph, LlmProvider& provider, const EnrichOptions& options = {},
                          const std::function<void(EnrichStage)>& on_stage = {});

} // namespace codegraph::enrich
