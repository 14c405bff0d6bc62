#include <codegraph/graph.hpp>

#include <algorithm>
#include <cmath>
#include <deque>

namespace codegraph {

NodeId::NodeId(std::string value) : value_(std::move(value)) {}

std::ostream& operator<<(std::ostream& os, const NodeId& id) {
    return os << id.str();
}

std::string_view to_string(NodeKind kind) noexcept {
    switch (kind) {
    case NodeKind::System: return "System";
    case NodeKind::Project: return "Project";
    case NodeKind::Code: return "Code";
    case NodeKind::Entity: return "Entity";
    }
    return "Unknown";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) noexcept {
    if (text == "System") return NodeKind::System;
    if (text == "Project") return NodeKind::Project;
    if (text == "Code") return NodeKind::Code;
    if (text == "Entity") return NodeKind::Entity;
    return std::nullopt;
}

const std::string* Node::attr(std::string_view key) const {
    const auto it = attrs.find(std::string(key));
    return it == attrs.end() ? nullptr : &it->second;
}

bool edge_less(const Edge& a, const Edge& b) noexcept {
    return std::tie(a.src, a.label, a.dst) < std::tie(b.src, b.label, b.dst);
}

bool is_valid_label(std::string_view label) noexcept {
    if (label.empty() || label.front() < 'A' || label.front() > 'Z') return false;
    return std::all_of(label.begin(), label.end(),
                       [](char c) { return (c >= 'A' && c <= 'Z') || c == '_'; });
}

bool is_reserved_label(std::string_view label) noexcept {
    return label == labels::kContains || label == labels::kDependsOn ||
           label == labels::kCalls || label == labels::kImplements ||
           label == labels::kRepresents || label == labels::kRelatesTo;
}

bool schema_allows(NodeKind src, std::string_view label, NodeKind dst) noexcept {
    if (!is_valid_label(label)) return false;
    using K = NodeKind;
    if (src == K::System && dst == K::Project) return label == labels::kContains;
    if (src == K::Project && dst == K::Code) return label == labels::kContains;
    if (src == K::Code && dst == K::Code) {
        return label == labels::kDependsOn || label == labels::kCalls ||
               label == labels::kImplements;
    }
    if (src == K::Code && dst == K::Entity) {
        // REPRESENTS or a dynamic verb; other structural labels are excluded.
        return label == labels::kRepresents || !is_reserved_label(label);
    }
    if (src == K::Entity && dst == K::Project) return label == labels::kRelatesTo;
    return false;
}

Subgraph::Subgraph(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const Node& a, const Node& b) { return a.id < b.id; });
    std::sort(edges_.begin(), edges_.end(), edge_less);
}

const Node* Subgraph::find(const NodeId& id) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                                     [](const Node& n, const NodeId& key) { return n.id < key; });
    return it != nodes_.end() && it->id == id ? &*it : nullptr;
}

bool Subgraph::contains(const NodeId& id) const {
    return find(id) != nullptr;
}

std::set<NodeId> Subgraph::node_ids() const {
    std::set<NodeId> ids;
    for (const auto& n : nodes_) ids.insert(n.id);
    return ids;
}

CodeGraph::CodeGraph(std::string system_name) : system_name_(std::move(system_name)) {}

const NodeId& CodeGraph::add_node(Node node) {
    if (node.id.empty()) throw Error(ErrorCode::InvalidArgument, "node id must not be empty");
    if (nodes_.count(node.id)) {
        throw Error(ErrorCode::DuplicateId, "duplicate node id: " + node.id.str());
    }
    if (node.embedding) {
        double sq = 0.0;
        for (float v : *node.embedding) sq += static_cast<double>(v) * v;
        if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
            throw Error(ErrorCode::InvalidArgument, "embedding of " + node.id.str() + " is not unit-norm");
        }
    }
    const NodeId id = node.id;
    auto [it, inserted] = nodes_.emplace(id, std::move(node));
    return it->first;
}

bool CodeGraph::add_edge(Edge edge) {
    const auto src = nodes_.find(edge.src);
    const auto dst = nodes_.find(edge.dst);
    if (src == nodes_.end() || dst == nodes_.end()) {
        throw Error(ErrorCode::UnknownEndpoint,
                    "edge endpoint not in graph: " +
                        (src == nodes_.end() ? edge.src.str() : edge.dst.str()));
    }
    if (!schema_allows(src->second.kind, edge.label, dst->second.kind)) {
        throw Error(ErrorCode::SchemaViolation,
                    "(" + std::string(to_string(src->second.kind)) + ")-[:" + edge.label + "]->(" +
                        std::string(to_string(dst->second.kind)) + ") is not allowed");
    }
    EdgeKey key{edge.src.str(), edge.label, edge.dst.str()};
    if (!edge_keys_.insert(std::move(key)).second) return false;
    const std::size_t index = edges_.size();
    out_[edge.src].push_back(index);
    in_[edge.dst].push_back(index);
    edges_.push_back(std::move(edge));
    return true;
}

const Node* CodeGraph::find(const NodeId& id) const {
    const auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const Node& CodeGraph::node(const NodeId& id) const {
    if (const Node* n = find(id)) return *n;
    throw Error(ErrorCode::UnknownId, "unknown node id: " + id.str());
}

Node& CodeGraph::mutable_node(const NodeId& id) {
    const auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(ErrorCode::UnknownId, "unknown node id: " + id.str());
    return it->second;
}

std::vector<NodeId> CodeGraph::nodes_of_kind(NodeKind kind) const {
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_) {
        if (n.kind == kind) out.push_back(id);
    }
    return out;
}

void CodeGraph::set_description(const NodeId& id, std::string description) {
    mutable_node(id).description = std::move(description);
}

void CodeGraph::set_embedding(const NodeId& id, Embedding embedding) {
    Node& n = mutable_node(id);
    double sq = 0.0;
    for (float v : embedding) sq += static_cast<double>(v) * v;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
        throw Error(ErrorCode::InvalidArgument, "embedding of " + id.str() + " is not unit-norm");
    }
    n.embedding = std::move(embedding);
}

void CodeGraph::set_attr(const NodeId& id, const std::string& key, std::string value) {
    mutable_node(id).attrs[key] = std::move(value);
}

std::vector<Edge> CodeGraph::sorted_edges() const {
    std::vector<Edge> out = edges_;
    std::sort(out.begin(), out.end(), edge_less);
    return out;
}

std::vector<const Edge*> CodeGraph::out_edges(const NodeId& id) const {
    std::vector<const Edge*> out;
    if (const auto it = out_.find(id); it != out_.end()) {
        for (std::size_t i : it->second) out.push_back(&edges_[i]);
    }
    return out;
}

std::vector<const Edge*> CodeGraph::in_edges(const NodeId& id) const {
    std::vector<const Edge*> out;
    if (const auto it = in_.find(id); it != in_.end()) {
        for (std::size_t i : it->second) out.push_back(&edges_[i]);
    }
    return out;
}

bool CodeGraph::has_edge(const NodeId& src, std::string_view label, const NodeId& dst) const {
    return edge_keys_.count(EdgeKey{src.str(), std::string(label), dst.str()}) != 0;
}

Subgraph CodeGraph::induced_subgraph(const std::set<NodeId>& ids) const {
    std::vector<Node> nodes;
    nodes.reserve(ids.size());
    for (const auto& id : ids) nodes.push_back(node(id));
    std::vector<Edge> edges;
    for (const auto& id : ids) {
        for (const Edge* e : out_edges(id)) {
            if (ids.count(e->dst)) edges.push_back(*e);
        }
    }
    return Subgraph(std::move(nodes), std::move(edges));
}

std::set<NodeId> CodeGraph::neighborhood(const NodeId& seed, Direction direction,
                                         const std::optional<std::set<std::string>>& labels,
                                         int depth) const {
    if (!contains(seed)) throw Error(ErrorCode::UnknownId, "unknown node id: " + seed.str());
    if (depth < 1) throw Error(ErrorCode::InvalidArgument, "neighborhood depth must be >= 1");

    std::set<NodeId> result;
    std::set<NodeId> visited{seed};
    std::vector<NodeId> frontier{seed};
    auto accept = [&](const Edge& e) { return !labels || labels->count(e.label) != 0; };

    for (int level = 0; level < depth && !frontier.empty(); ++level) {
        std::vector<NodeId> next;
        auto visit = [&](const NodeId& m) {
            if (m == seed) result.insert(seed);
            if (visited.insert(m).second) {
                result.insert(m);
                next.push_back(m);
            }
        };
        for (const auto& n : frontier) {
            if (direction != Direction::In) {
                for (const Edge* e : out_edges(n)) {
                    if (accept(*e)) visit(e->dst);
                }
            }
            if (direction != Direction::Out) {
                for (const Edge* e : in_edges(n)) {
                    if (accept(*e)) visit(e->src);
                }
            }
        }
        frontier = std::move(next);
    }
    return result;
}

std::optional<NodeId> CodeGraph::system_id() const {
    for (const auto& [id, n] : nodes_) {
        if (n.kind == NodeKind::System) return id;
    }
    return std::nullopt;
}

std::optional<NodeId> CodeGraph::parent_project(const NodeId& code) const {
    for (const Edge* e : in_edges(code)) {
        if (e->label == labels::kContains && node(e->src).kind == NodeKind::Project) return e->src;
    }
    return std::nullopt;
}

void CodeGraph::validate() const {
    std::size_t systems = 0;
    for (const auto& [id, n] : nodes_) {
        if (n.kind == NodeKind::System) ++systems;
    }
    if (systems != 1) {
        throw Error(ErrorCode::SchemaViolation,
                    "graph must hold exactly one System node, found " + std::to_string(systems));
    }
    for (const auto& e : edges_) {
        if (!schema_allows(node(e.src).kind, e.label, node(e.dst).kind)) {
            throw Error(ErrorCode::SchemaViolation, "edge violates schema: " + e.src.str() + " -" +
                                                        e.label + "-> " + e.dst.str());
        }
    }
    for (const auto& [id, n] : nodes_) {
        std::size_t parents = 0;
        for (const Edge* e : in_edges(id)) {
            if (e->label == labels::kContains) ++parents;
        }
        if ((n.kind == NodeKind::Project || n.kind == NodeKind::Code) && parents != 1) {
            throw Error(ErrorCode::SchemaViolation,
                        std::string(to_string(n.kind)) + " node " + id.str() +
                            " must have exactly one CONTAINS parent, found " +
                            std::to_string(parents));
        }
        if (n.kind == NodeKind::Code &&
            (!n.attr(attrs::kFile) || n.attr(attrs::kFile)->empty() || !n.attr(attrs::kSpan) ||
             n.attr(attrs::kSpan)->empty())) {
            throw Error(ErrorCode::SchemaViolation, "Code node " + id.str() + " lacks file/span attrs");
        }
    }
}

} // namespace codegraph
