#include <codegraph/enrich/enricher.hpp>

#include <codegraph/util/parallel.hpp>
#include <codegraph/util/text.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace codegraph::enrich {

using json = nlohmann::json;

std::string normalize_entity_name(std::string_view raw) {
    auto words = util::split(util::collapse_spaces(util::trim(raw)), ' ');
    words.erase(std::remove(words.begin(), words.end(), std::string{}), words.end());
    if (words.empty()) return {};
    auto& last = words.back();
    const auto lower = util::to_lower(last);
    if (lower.size() > 1 && lower.back() == 's' && !util::ends_with(lower, "ss") && !util::ends_with(lower, "us") &&
        !util::ends_with(lower, "is")) {
        last.pop_back();
    }
    for (auto& w : words) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return util::join(words, " ");
}

NodeId entity_node_id(std::string_view normalized_name) {
    return NodeId("entity:" + std::string(normalized_name));
}

namespace {

const std::string& attr_or_empty(const Node& n, std::string_view key) {
    static const std::string empty;
    const auto* v = n.attr(key);
    return v ? *v : empty;
}

std::vector<NodeId> project_children(const CodeGraph& graph, const NodeId& project) {
    std::vector<NodeId> out;
    for (const auto* e : graph.out_edges(project)) {
        if (e->label != labels::kContains) continue;
        if (graph.node(e->dst).kind == NodeKind::Code) out.push_back(e->dst);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string one_line(std::string_view text) {
    std::string out;
    for (char c : text) out.push_back(c == '\n' || c == '\r' ? ' ' : c);
    return util::collapse_spaces(util::trim(out));
}

std::string listing(const CodeGraph& graph, const std::vector<NodeId>& ids, std::string_view tag) {
    std::string out;
    for (const auto& id : ids) {
        const auto& n = graph.node(id);
        out += std::string(tag) + " " + id.str() + " | " + n.name + " | " +
               (n.description ? one_line(*n.description) : std::string("(no description)")) + "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

const Node& require_kind(const CodeGraph& graph, const NodeId& id, NodeKind kind) {
    const auto& n = graph.node(id);
    if (n.kind != kind) {
        throw Error(ErrorCode::InvalidArgument,
                    id.str() + " is a " + std::string(to_string(n.kind)) + ", expected " + std::string(to_string(kind)));
    }
    return n;
}

// Provider call with retries; empty replies count as failures.
std::string call(LlmProvider& provider, const std::string& prompt, Tier tier, const RetryPolicy& retry) {
    return with_retries(retry, [&] {
        auto reply = std::string(util::trim(provider.complete(prompt, tier)));
        if (reply.empty()) throw Error(ErrorCode::ProviderFailure, "empty completion");
        return reply;
    });
}

std::string describe_with(CodeGraph& graph, const NodeId& id, LlmProvider& provider, const std::string& prompt,
                          Tier tier, const RetryPolicy& retry) {
    try {
        auto text = call(provider, prompt, tier, retry);
        graph.set_description(id, text);
        return text;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderFailure) throw;
        graph.set_attr(id, std::string(attrs::kDegraded), e.what());
        return {};
    }
}

bool empty_source(const Node& n) {
    return util::trim(attr_or_empty(n, attrs::kSource)).empty();
}

} // namespace

std::string build_code_prompt(const CodeGraph& graph, const NodeId& code, const PromptLibrary& prompts) {
    const auto& n = require_kind(graph, code, NodeKind::Code);
    const auto project = graph.parent_project(code);
    return render(prompts.get("describe_code").text,
                  {{"name", n.name},
                   {"unit_kind", attr_or_empty(n, attrs::kUnitKind)},
                   {"project", project ? graph.node(*project).name : std::string()},
                   {"file", attr_or_empty(n, attrs::kFile)},
                   {"language", attr_or_empty(n, attrs::kLanguage)},
                   {"source", attr_or_empty(n, attrs::kSource)}});
}

std::string build_project_prompt(const CodeGraph& graph, const NodeId& project, const PromptLibrary& prompts) {
    const auto& n = require_kind(graph, project, NodeKind::Project);
    const auto children = project_children(graph, project);
    return render(prompts.get("describe_project").text,
                  {{"project", n.name},
                   {"language", attr_or_empty(n, attrs::kLanguage)},
                   {"count", std::to_string(children.size())},
                   {"units", listing(graph, children, "UNIT")}});
}

std::string build_system_prompt(const CodeGraph& graph, const PromptLibrary& prompts) {
    const auto sys = graph.system_id();
    if (!sys) throw Error(ErrorCode::SchemaViolation, "graph has no System node");
    const auto projects = graph.nodes_of_kind(NodeKind::Project);
    return render(prompts.get("describe_system").text,
                  {{"system", graph.node(*sys).name},
                   {"count", std::to_string(projects.size())},
                   {"projects", listing(graph, projects, "PROJECT")}});
}

std::string build_entities_prompt(const CodeGraph& graph, const NodeId& project, const PromptLibrary& prompts) {
    const auto& n = require_kind(graph, project, NodeKind::Project);
    const auto children = project_children(graph, project);
    return render(prompts.get("extract_entities").text,
                  {{"project", n.name},
                   {"count", std::to_string(children.size())},
                   {"units", listing(graph, children, "UNIT")}});
}

std::string describe_code(CodeGraph& graph, const NodeId& code, LlmProvider& provider, const EnrichOptions& options) {
    const auto& n = require_kind(graph, code, NodeKind::Code);
    if (empty_source(n)) {
        graph.set_description(code, std::string(kEmptyCodeDescription));
        return std::string(kEmptyCodeDescription);
    }
    return describe_with(graph, code, provider, build_code_prompt(graph, code, options.prompts), Tier::Fast,
                         options.retry);
}

std::string describe_project(CodeGraph& graph, const NodeId& project, LlmProvider& provider,
                             const EnrichOptions& options) {
    require_kind(graph, project, NodeKind::Project);
    if (project_children(graph, project).empty()) {
        graph.set_description(project, std::string(kEmptyProjectDescription));
        return std::string(kEmptyProjectDescription);
    }
    return describe_with(graph, project, provider, build_project_prompt(graph, project, options.prompts), Tier::Deep,
                         options.retry);
}

std::string describe_system(CodeGraph& graph, LlmProvider& provider, const EnrichOptions& options) {
    const auto prompt = build_system_prompt(graph, options.prompts);
    return describe_with(graph, *graph.system_id(), provider, prompt, Tier::Deep, options.retry);
}

namespace {

void merge_into(ExtractedEntity& into, const ExtractedEntity& from) {
    if (!from.description.empty()) {
        const auto parts = util::split(into.description, '\n');
        if (into.description.empty()) {
            into.description = from.description;
        } else if (std::find(parts.begin(), parts.end(), from.description) == parts.end() &&
                   into.description != from.description) {
            into.description += "\n" + from.description;
        }
    }
    into.operations.insert(into.operations.end(), from.operations.begin(), from.operations.end());
    std::sort(into.operations.begin(), into.operations.end());
    into.operations.erase(std::unique(into.operations.begin(), into.operations.end()), into.operations.end());
    into.represented_by.insert(into.represented_by.end(), from.represented_by.begin(), from.represented_by.end());
    std::sort(into.represented_by.begin(), into.represented_by.end());
    into.represented_by.erase(std::unique(into.represented_by.begin(), into.represented_by.end()),
                              into.represented_by.end());
}

std::string_view json_slice(std::string_view text) {
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return text;
    return text.substr(open, close - open + 1);
}

bool is_code(const CodeGraph& graph, const std::string& uid) {
    const auto* n = graph.find(NodeId(uid));
    return n && n->kind == NodeKind::Code;
}

} // namespace

EntityExtraction parse_extraction(std::string_view response, const CodeGraph& graph) {
    json doc;
    try {
        doc = json::parse(json_slice(response));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedExtraction, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("entities") || !doc["entities"].is_array()) {
        throw Error(ErrorCode::MalformedExtraction, "expected an object with an \"entities\" array");
    }

    EntityExtraction out;
    std::map<std::string, ExtractedEntity> by_name;
    for (const auto& item : doc["entities"]) {
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
            out.diagnostics.push_back("entity without a name dropped");
            continue;
        }
        ExtractedEntity e;
        e.name = normalize_entity_name(item["name"].get<std::string>());
        if (e.name.empty()) {
            out.diagnostics.push_back("entity with a blank name dropped");
            continue;
        }
        if (item.contains("description") && item["description"].is_string()) {
            e.description = std::string(util::trim(item["description"].get<std::string>()));
        }
        if (item.contains("operations") && item["operations"].is_array()) {
            for (const auto& op : item["operations"]) {
                if (!op.is_object() || !op.contains("codeUid") || !op.contains("verb") || !op["codeUid"].is_string() ||
                    !op["verb"].is_string()) {
                    out.diagnostics.push_back(e.name + ": malformed operation dropped");
                    continue;
                }
                const auto uid = op["codeUid"].get<std::string>();
                const auto verb = op["verb"].get<std::string>();
                if (!is_valid_label(verb) || is_reserved_label(verb)) {
                    out.diagnostics.push_back(e.name + ": invalid verb \"" + verb + "\" dropped");
                    continue;
                }
                if (!is_code(graph, uid)) {
                    out.diagnostics.push_back(e.name + ": unknown code unit \"" + uid + "\" dropped");
                    continue;
                }
                e.operations.push_back({uid, verb});
            }
        }
        if (item.contains("representedBy") && item["representedBy"].is_array()) {
            for (const auto& r : item["representedBy"]) {
                if (!r.is_string() || !is_code(graph, r.get<std::string>())) {
                    out.diagnostics.push_back(e.name + ": unknown representing unit " + r.dump() + " dropped");
                    continue;
                }
                e.represented_by.push_back(r.get<std::string>());
            }
        }
        auto [it, inserted] = by_name.try_emplace(e.name, ExtractedEntity{e.name, {}, {}, {}});
        merge_into(it->second, e);
    }
    for (auto& [name, e] : by_name) out.entities.push_back(std::move(e));
    return out;
}

EntityExtraction extract_entities(const CodeGraph& graph, const NodeId& project, LlmProvider& provider,
                                  const EnrichOptions& options) {
    require_kind(graph, project, NodeKind::Project);
    if (project_children(graph, project).empty()) return {};

    const auto base = build_entities_prompt(graph, project, options.prompts);
    std::string prompt = base;
    std::vector<std::string> diagnostics;
    for (int attempt = 0;; ++attempt) {
        std::string reply;
        try {
            reply = call(provider, prompt, Tier::Deep, options.retry);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ProviderFailure) throw;
            diagnostics.push_back(project.str() + ": entity extraction failed: " + e.what());
            return {{}, diagnostics};
        }
        try {
            auto result = parse_extraction(reply, graph);
            for (auto& d : result.diagnostics) d = project.str() + ": " + d;
            result.diagnostics.insert(result.diagnostics.begin(), diagnostics.begin(), diagnostics.end());
            return result;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::MalformedExtraction) throw;
            diagnostics.push_back(project.str() + ": " + e.what());
            if (attempt >= options.repair_retries) {
                diagnostics.push_back(project.str() + ": giving up after " + std::to_string(attempt) + " repairs");
                return {{}, diagnostics};
            }
            prompt = render(options.prompts.get("extract_entities_repair").text,
                            {{"error", e.what()}, {"previous", reply}, {"prompt", base}});
        }
    }
}

std::vector<ExtractedEntity> merge_entities(std::vector<ProjectExtraction> per_project) {
    std::stable_sort(per_project.begin(), per_project.end(),
                     [](const ProjectExtraction& a, const ProjectExtraction& b) { return a.project < b.project; });
    std::map<std::string, ExtractedEntity> merged;
    for (const auto& p : per_project) {
        for (const auto& e : p.extraction.entities) {
            const auto name = normalize_entity_name(e.name);
            if (name.empty()) continue;
            auto [it, inserted] = merged.try_emplace(name, ExtractedEntity{name, {}, {}, {}});
            merge_into(it->second, e);
        }
    }
    std::vector<ExtractedEntity> out;
    out.reserve(merged.size());
    for (auto& [name, e] : merged) out.push_back(std::move(e));
    return out;
}

namespace {

std::map<NodeId, std::set<NodeId>> justified_relations(const CodeGraph& graph) {
    std::map<NodeId, std::set<NodeId>> out;
    for (const auto& entity : graph.nodes_of_kind(NodeKind::Entity)) {
        auto& projects = out[entity];
        for (const auto* e : graph.in_edges(entity)) {
            if (graph.node(e->src).kind != NodeKind::Code) continue;
            if (auto p = graph.parent_project(e->src)) projects.insert(*p);
        }
    }
    return out;
}

} // namespace

void apply_semantic_layer(CodeGraph& graph, const std::vector<ExtractedEntity>& entities) {
    for (const auto& e : entities) {
        const auto id = entity_node_id(e.name);
        if (!graph.contains(id)) {
            Node n;
            n.id = id;
            n.kind = NodeKind::Entity;
            n.name = e.name;
            if (!e.description.empty()) n.description = e.description;
            graph.add_node(std::move(n));
        } else if (!e.description.empty() && graph.node(id).description != e.description) {
            graph.set_description(id, e.description);
        }
        for (const auto& op : e.operations) graph.add_edge(Edge{NodeId(op.code_uid), op.verb, id, {}});
        for (const auto& uid : e.represented_by) {
            graph.add_edge(Edge{NodeId(uid), std::string(labels::kRepresents), id, {}});
        }
    }
    for (const auto& [entity, projects] : justified_relations(graph)) {
        for (const auto& p : projects) graph.add_edge(Edge{entity, std::string(labels::kRelatesTo), p, {}});
    }
}

std::vector<std::string> check_relates_to(const CodeGraph& graph) {
    std::vector<std::string> problems;
    auto expected = justified_relations(graph);
    std::map<NodeId, std::set<NodeId>> actual;
    for (const auto& e : graph.edges()) {
        if (e.label == labels::kRelatesTo) actual[e.src].insert(e.dst);
    }
    for (const auto& [entity, projects] : actual) {
        for (const auto& p : projects) {
            if (!expected[entity].count(p)) {
                problems.push_back(entity.str() + " -RELATES_TO-> " + p.str() + " has no incident code in the project");
            }
        }
    }
    for (const auto& [entity, projects] : expected) {
        for (const auto& p : projects) {
            if (!actual[entity].count(p)) {
                problems.push_back(entity.str() + " is missing RELATES_TO " + p.str());
            }
        }
    }
    return problems;
}

EnrichReport enrich_graph(CodeGraph& graph, LlmProvider& provider, const EnrichOptions& options,
                          const std::function<void(EnrichStage)>& on_stage) {
    EnrichReport report;
    for (const auto& [name, tpl] : options.prompts.all()) graph.meta()["template_hash." + name] = tpl.hash();

    if (on_stage) on_stage(EnrichStage::Describing);

    // Code summaries: prompts are built up front, calls run in parallel,
    // results are written back in NodeId order.
    const auto codes = graph.nodes_of_kind(NodeKind::Code);
    std::vector<std::string> prompts(codes.size());
    std::vector<std::optional<std::string>> replies(codes.size());
    std::vector<std::string> failures(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (!empty_source(graph.node(codes[i]))) prompts[i] = build_code_prompt(graph, codes[i], options.prompts);
    }
    util::parallel_for(codes.size(), options.parallelism, [&](std::size_t i) {
        if (prompts[i].empty()) return;
        try {
            replies[i] = call(provider, prompts[i], Tier::Fast, options.retry);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ProviderFailure) throw;
            failures[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (prompts[i].empty()) {
            graph.set_description(codes[i], std::string(kEmptyCodeDescription));
        } else if (replies[i]) {
            graph.set_description(codes[i], *replies[i]);
        } else {
            graph.set_attr(codes[i], std::string(attrs::kDegraded), failures[i]);
            report.diagnostics.push_back(codes[i].str() + ": description failed: " + failures[i]);
            ++report.degraded;
            continue;
        }
        ++report.described;
    }

    const auto projects = graph.nodes_of_kind(NodeKind::Project);
    for (const auto& p : projects) {
        if (describe_project(graph, p, provider, options).empty()) {
            ++report.degraded;
            report.diagnostics.push_back(p.str() + ": description failed");
        } else {
            ++report.described;
        }
    }
    if (describe_system(graph, provider, options).empty()) {
        ++report.degraded;
        report.diagnostics.push_back("system description failed");
    } else {
        ++report.described;
    }

    if (on_stage) on_stage(EnrichStage::Entities);
    std::vector<ProjectExtraction> extractions;
    for (const auto& p : projects) {
        auto x = extract_entities(graph, p, provider, options);
        report.diagnostics.insert(report.diagnostics.end(), x.diagnostics.begin(), x.diagnostics.end());
        extractions.push_back({p, std::move(x)});
    }
    const auto merged = merge_entities(std::move(extractions));
    apply_semantic_layer(graph, merged);
    report.entities = merged.size();
    graph.validate();
    return report;
}

} // namespace codegraph::enrich
