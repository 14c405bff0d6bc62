#include <codegraph/agent/tools.hpp>

#include <codegraph/query.hpp>
#include <codegraph/util/text.hpp>

#include <algorithm>
#include <cstdio>
#include <set>

namespace codegraph::agent {

std::string first_sentence(std::string_view text) {
    std::string flat;
    for (char c : util::trim(text)) flat.push_back(c == '\n' || c == '\r' || c == '\t' ? ' ' : c);
    flat = util::collapse_spaces(flat);
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const char c = flat[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == flat.size() || flat[i + 1] == ' ')) {
            return flat.substr(0, i + 1);
        }
    }
    return flat;
}

std::string render_subgraph(const Subgraph& subgraph) {
    if (subgraph.empty()) return std::string(kEmptyResult);
    std::vector<const Node*> nodes;
    for (const auto& n : subgraph.nodes()) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) {
        if (a->kind != b->kind) return a->kind < b->kind;
        return a->id < b->id;
    });
    std::string out;
    for (const auto* n : nodes) {
        out += "[" + std::string(to_string(n->kind)) + "] " + n->id.str() + ": " + n->name;
        if (n->description && !util::trim(*n->description).empty()) {
            out += " \xE2\x80\x94 " + first_sentence(*n->description);
        }
        out += '\n';
    }
    auto edges = subgraph.edges();
    std::sort(edges.begin(), edges.end(), edge_less);
    for (const auto& e : edges) out += e.src.str() + " -" + e.label + "-> " + e.dst.str() + "\n";
    out.pop_back();
    return out;
}

std::string fit_budget(std::string text, std::size_t max_tokens, bool* truncated) {
    if (truncated) *truncated = false;
    if (util::estimate_tokens(text) <= max_tokens) return text;
    if (truncated) *truncated = true;
    const std::size_t limit = max_tokens * 4;
    const std::size_t tail = kTruncationMarker.size() + 1;
    if (limit <= tail) return std::string(kTruncationMarker);
    std::string out(util::utf8_prefix(text, limit - tail));
    out += "\n";
    out += kTruncationMarker;
    return out;
}

Toolbox::Toolbox(const CodeGraph& graph, const index::SemanticIndex& index, std::size_t obs_tokens)
    : graph_(graph), index_(index), obs_tokens_(obs_tokens) {
    if (obs_tokens_ == 0) throw Error(ErrorCode::InvalidArgument, "observation budget must be positive");
}

namespace {

void note(std::vector<std::string>* notes, std::string text) {
    if (notes) notes->push_back(std::move(text));
}

std::string fmt_score(double score) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", score);
    return buf;
}

void note_hits(std::vector<std::string>* notes, const std::vector<index::SearchHit>& hits) {
    for (const auto& h : hits) note(notes, "hit " + h.id.str() + " score=" + fmt_score(h.score));
}

void note_params(std::vector<std::string>* notes, std::size_t k, double threshold) {
    note(notes, "k=" + std::to_string(k) + " threshold=" + fmt_score(threshold));
}

} // namespace

Subgraph Toolbox::projects_subgraph(std::string_view query, std::size_t k, double threshold,
                                    std::vector<std::string>* notes) const {
    note_params(notes, k, threshold);
    const auto q = index_.embed_query(query);
    const auto hits = index_.search_vector(q, NodeKind::Project, k, threshold);
    note_hits(notes, hits);
    if (hits.empty()) {
        note(notes, "no projects matched");
        return {};
    }
    std::set<NodeId> keep;
    const std::set<std::string> contains{std::string(labels::kContains)};
    for (const auto& h : hits) {
        keep.insert(h.id);
        for (const auto& c : graph_.neighborhood(h.id, Direction::Out, contains, 1)) {
            if (graph_.node(c).kind != NodeKind::Code) continue;
            const double score = index_.similarity(q, c);
            if (score >= threshold) {
                keep.insert(c);
            } else {
                note(notes, "code " + c.str() + " below threshold (" + fmt_score(score) + ")");
            }
        }
    }
    return graph_.induced_subgraph(keep);
}

Subgraph Toolbox::entities_subgraph(std::string_view query, std::size_t k, double threshold,
                                    std::vector<std::string>* notes) const {
    if (graph_.nodes_of_kind(NodeKind::Entity).empty()) {
        throw Error(ErrorCode::NoEntities, "the graph has no entity layer");
    }
    note_params(notes, k, threshold);
    const auto hits = index_.search(query, NodeKind::Entity, k, threshold);
    note_hits(notes, hits);
    if (hits.empty()) {
        note(notes, "no entities matched");
        return {};
    }
    std::map<NodeId, Node> nodes;
    std::vector<Edge> edges;
    for (const auto& h : hits) {
        nodes.emplace(h.id, graph_.node(h.id));
        for (const auto* e : graph_.in_edges(h.id)) {
            edges.push_back(*e);
            nodes.emplace(e->src, graph_.node(e->src));
        }
    }
    std::vector<Node> list;
    for (auto& [id, n] : nodes) list.push_back(std::move(n));
    return Subgraph(std::move(list), std::move(edges));
}

Subgraph Toolbox::codes_subgraph(std::string_view query, std::size_t k, double threshold,
                                 std::vector<std::string>* notes) const {
    note_params(notes, k, threshold);
    const auto hits = index_.search(query, NodeKind::Code, k, threshold);
    note_hits(notes, hits);
    if (hits.empty()) {
        note(notes, "no code units matched");
        return {};
    }
    std::set<NodeId> keep;
    for (const auto& h : hits) keep.insert(h.id);
    return graph_.induced_subgraph(keep);
}

ToolResult Toolbox::finish(std::string tool, std::string payload, std::vector<std::string> notes) const {
    ToolResult r;
    r.tool = std::move(tool);
    r.payload = fit_budget(std::move(payload), obs_tokens_, &r.truncated);
    if (r.truncated) notes.push_back("observation truncated to " + std::to_string(obs_tokens_) + " tokens");
    r.token_estimate = util::estimate_tokens(r.payload);
    r.diagnostics = std::move(notes);
    return r;
}

ToolResult Toolbox::projects(std::string_view query, std::optional<std::size_t> k,
                             std::optional<double> threshold) const {
    std::vector<std::string> notes;
    auto sg = projects_subgraph(query, k.value_or(index_.defaults().k), threshold.value_or(index_.defaults().threshold),
                                &notes);
    return finish(std::string(to_string(ToolName::Projects)), render_subgraph(sg), std::move(notes));
}

ToolResult Toolbox::entities(std::string_view query, std::optional<std::size_t> k,
                             std::optional<double> threshold) const {
    std::vector<std::string> notes;
    auto sg = entities_subgraph(query, k.value_or(index_.defaults().k), threshold.value_or(index_.defaults().threshold),
                                &notes);
    return finish(std::string(to_string(ToolName::Entities)), render_subgraph(sg), std::move(notes));
}

ToolResult Toolbox::codes(std::string_view query, std::optional<std::size_t> k, std::optional<double> threshold) const {
    std::vector<std::string> notes;
    auto sg = codes_subgraph(query, k.value_or(index_.defaults().k), threshold.value_or(index_.defaults().threshold),
                             &notes);
    return finish(std::string(to_string(ToolName::Codes)), render_subgraph(sg), std::move(notes));
}

ToolResult Toolbox::graph_query(std::string_view text) const {
    const std::string tool(to_string(ToolName::GraphQuery));
    try {
        const auto rows = execute_query(graph_, text);
        if (rows.count) return finish(tool, "COUNT " + std::to_string(*rows.count), {});
        std::string out = std::to_string(rows.rows.size()) + (rows.rows.size() == 1 ? " row" : " rows");
        for (const auto& row : rows.rows) {
            out += "\n";
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += " | ";
                out += rows.columns[i] + "=" + row[i].str();
            }
        }
        return finish(tool, std::move(out), {});
    } catch (const QueryParseError& e) {
        std::string out = "QUERY ERROR: position " + std::to_string(e.position()) + ": " + e.what();
        if (!e.expected().empty()) out += " (expected " + util::join(e.expected(), ", ") + ")";
        return finish(tool, std::move(out), {"query rejected"});
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ParseError && e.code() != ErrorCode::InvalidArgument) throw;
        return finish(tool, "QUERY ERROR: " + std::string(e.what()), {"query rejected"});
    }
}

ToolResult Toolbox::source(const NodeId& id) const {
    const auto& n = graph_.node(id);
    if (n.kind != NodeKind::Code) {
        throw Error(ErrorCode::NotACodeNode, id.str() + " is a " + std::string(to_string(n.kind)) + " node");
    }
    const auto* src = n.attr(attrs::kSource);
    return finish(std::string(to_string(ToolName::Source)), src ? *src : std::string(), {});
}

ToolResult Toolbox::invoke(const ToolCall& call) const {
    try {
        validate_args(call.tool, call.args);
        const auto& a = call.args;
        std::optional<std::size_t> k;
        std::optional<double> threshold;
        if (a.contains("k")) k = a["k"].get<std::size_t>();
        if (a.contains("threshold")) threshold = a["threshold"].get<double>();
        switch (call.tool) {
        case ToolName::Projects: return projects(a["query"].get<std::string>(), k, threshold);
        case ToolName::Entities: return entities(a["query"].get<std::string>(), k, threshold);
        case ToolName::Codes: return codes(a["query"].get<std::string>(), k, threshold);
        case ToolName::GraphQuery: return graph_query(a["query"].get<std::string>());
        case ToolName::Source: return source(NodeId(a["id"].get<std::string>()));
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ProviderFailure || e.code() == ErrorCode::ReplayMiss) throw;
        return finish(std::string(to_string(call.tool)),
                      "TOOL ERROR: " + std::string(codegraph::to_string(e.code())) + ": " + e.what(), {e.what()});
    }
    return {};
}

} // namespace codegraph::agent
