#pragma once

#include <codegraph/error.hpp>

#include <compare>
#include <cstdint>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace codegraph {

// Opaque, non-empty node identifier. For Code nodes it is the qualified
// identifier produced by the language adapter.
class NodeId {
public:
    NodeId() = default;
    explicit NodeId(std::string value);

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
    friend bool operator==(const NodeId&, const NodeId&) = default;

private:
    std::string value_;
};

std::ostream& operator<<(std::ostream& os, const NodeId& id);

enum class NodeKind { System, Project, Code, Entity };

std::string_view to_string(NodeKind kind) noexcept;
std::optional<NodeKind> parse_node_kind(std::string_view text) noexcept;

using Attrs = std::map<std::string, std::string>;
using Embedding = std::vector<float>;

namespace labels {
inline constexpr std::string_view kContains = "CONTAINS";
inline constexpr std::string_view kDependsOn = "DEPENDS_ON";
inline constexpr std::string_view kCalls = "CALLS";
inline constexpr std::string_view kImplements = "IMPLEMENTS";
inline constexpr std::string_view kRepresents = "REPRESENTS";
inline constexpr std::string_view kRelatesTo = "RELATES_TO";
} // namespace labels

// Attribute keys used on Code nodes.
namespace attrs {
inline constexpr std::string_view kFile = "file";
inline constexpr std::string_view kSpan = "span";
inline constexpr std::string_view kLanguage = "language";
inline constexpr std::string_view kUnitKind = "unit_kind";
inline constexpr std::string_view kSource = "source";
inline constexpr std::string_view kMethods = "methods";
inline constexpr std::string_view kDegraded = "degraded";
} // namespace attrs

struct Node {
    NodeId id;
    NodeKind kind = NodeKind::Code;
    std::string name;
    std::optional<std::string> description;
    std::optional<Embedding> embedding;
    Attrs attrs;

    const std::string* attr(std::string_view key) const;
    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
    NodeId src;
    std::string label;
    NodeId dst;
    Attrs attrs;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Total order used for rendering and persistence: (src, label, dst).
bool edge_less(const Edge& a, const Edge& b) noexcept;

// Matches [A-Z][A-Z_]*.
bool is_valid_label(std::string_view label) noexcept;

// Labels with fixed structural meaning; never usable as a Code->Entity verb.
bool is_reserved_label(std::string_view label) noexcept;

// The kind-compatibility table. Total over every (kind, label, kind) triple.
bool schema_allows(NodeKind src, std::string_view label, NodeKind dst) noexcept;

enum class Direction { In, Out, Both };

// Read-only node/edge set produced by subgraph operations.
class Subgraph {
public:
    Subgraph() = default;
    Subgraph(std::vector<Node> nodes, std::vector<Edge> edges);

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    bool empty() const noexcept { return nodes_.empty(); }
    bool contains(const NodeId& id) const;
    const Node* find(const NodeId& id) const;
    std::set<NodeId> node_ids() const;

    friend bool operator==(const Subgraph&, const Subgraph&) = default;

private:
    std::vector<Node> nodes_; // sorted by id
    std::vector<Edge> edges_; // sorted by edge_less
};

// Directed labeled property multigraph. Single writer during build; all
// const member functions are safe to call concurrently afterwards.
class CodeGraph {
public:
    static constexpr std::uint32_t kSchemaVersion = 1;

    explicit CodeGraph(std::string system_name = {});

    const std::string& system_name() const noexcept { return system_name_; }
    void set_system_name(std::string name) { system_name_ = std::move(name); }

    // Throws DuplicateId, InvalidArgument (empty id).
    const NodeId& add_node(Node node);

    // Returns true if inserted, false if an identical (src, label, dst) edge exists.
    // Throws UnknownEndpoint, SchemaViolation.
    bool add_edge(Edge edge);

    bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }
    const Node& node(const NodeId& id) const; // UnknownId
    const Node* find(const NodeId& id) const;
    const std::map<NodeId, Node>& nodes() const noexcept { return nodes_; }
    std::vector<NodeId> nodes_of_kind(NodeKind kind) const;

    void set_description(const NodeId& id, std::string description);
    // Throws InvalidArgument unless the vector is unit-norm within 1e-6.
    void set_embedding(const NodeId& id, Embedding embedding);
    void set_attr(const NodeId& id, const std::string& key, std::string value);

    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::vector<Edge> sorted_edges() const;
    std::vector<const Edge*> out_edges(const NodeId& id) const;
    std::vector<const Edge*> in_edges(const NodeId& id) const;
    bool has_edge(const NodeId& src, std::string_view label, const NodeId& dst) const;
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    // Exactly the given nodes plus every edge with both endpoints among them.
    Subgraph induced_subgraph(const std::set<NodeId>& ids) const;

    // Union of BFS frontiers up to depth; the seed is included only when a
    // path leads back to it.
    std::set<NodeId> neighborhood(const NodeId& seed, Direction direction,
                                  const std::optional<std::set<std::string>>& labels,
                                  int depth) const;

    std::optional<NodeId> system_id() const;
    // The Project holding a Code node through CONTAINS, if any.
    std::optional<NodeId> parent_project(const NodeId& code) const;

    std::map<std::string, std::string>& meta() noexcept { return meta_; }
    const std::map<std::string, std::string>& meta() const noexcept { return meta_; }

    // Checks the whole-graph invariants (one System node, containment
    // forest, schema totality). Throws SchemaViolation naming the first breach.
    void validate() const;

private:
    using EdgeKey = std::tuple<std::string, std::string, std::string>;

    std::string system_name_;
    std::map<NodeId, Node> nodes_;
    std::vector<Edge> edges_;
    std::map<NodeId, std::vector<std::size_t>> out_;
    std::map<NodeId, std::vector<std::size_t>> in_;
    std::set<EdgeKey> edge_keys_;
    std::map<std::string, std::string> meta_;

    Node& mutable_node(const NodeId& id);
};

} // namespace codegraph

template <>
struct std::hash<codegraph::NodeId> {
    std::size_t operator()(const codegraph::NodeId& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
