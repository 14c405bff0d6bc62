#pragma once

#include <codegraph/graph.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace codegraph {

// Read-only single-path pattern language:
//
//   query    := "MATCH" pattern "RETURN" retclause
//   pattern  := nodepat (edgepat nodepat)?
//   nodepat  := "(" var (":" kind)? ("{" key ":" qstring ("," key ":" qstring)* "}")? ")"
//   edgepat  := "-[" (":" label ("|" label)*)? ("*" int ".." int)? "]->"
//   retclause:= "COUNT" | var ("," var)*
//
// A filter key "name" tests Node::name; any other key tests an attribute.
// Variable-length steps match walks whose length lies in [lo, hi].

struct NodePattern {
    std::string var;
    std::optional<std::string> kind;
    std::vector<std::pair<std::string, std::string>> filters;
};

struct EdgePattern {
    std::vector<std::string> labels; // empty: any label
    int min_hops = 1;
    int max_hops = 1;
};

struct GraphQuery {
    NodePattern source;
    std::optional<EdgePattern> edge;
    std::optional<NodePattern> target;
    bool count = false;
    std::vector<std::string> returns;
};

struct QueryRows {
    std::vector<std::string> columns;
    std::vector<std::vector<NodeId>> rows;
    std::optional<std::size_t> count;

    friend bool operator==(const QueryRows&, const QueryRows&) = default;
};

class QueryParseError : public Error {
public:
    QueryParseError(std::size_t position, std::vector<std::string> expected, const std::string& detail);

    std::size_t position() const noexcept { return position_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::vector<std::string> expected_;
};

GraphQuery parse_query(std::string_view text);

bool node_matches(const Node& node, const NodePattern& pattern);

// Rows are distinct projections of all bindings, sorted lexicographically by
// NodeId tuple. COUNT yields the number of distinct full bindings.
QueryRows execute_query(const CodeGraph& graph, const GraphQuery& query);
QueryRows execute_query(const CodeGraph& graph, std::string_view text);

} // namespace codegraph
