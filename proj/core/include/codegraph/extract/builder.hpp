#pragma once

#include <codegraph/extract/types.hpp>
#include <codegraph/graph.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace codegraph::extract {

struct ExtractOptions {
    bool promote_methods = false;
    std::uintmax_t max_file_bytes = 1u << 20;
    std::size_t workers = 4;
};

struct RepoCounts {
    std::size_t files = 0;
    std::size_t units = 0;
    std::size_t relations = 0;
    std::size_t resolved = 0;
    std::size_t unresolved = 0;
    std::size_t ambiguous = 0;

    friend bool operator==(const RepoCounts&, const RepoCounts&) = default;
};

struct ExtractionReport {
    std::vector<std::pair<std::string, RepoCounts>> repos; // in spec order
    std::vector<Diagnostic> diagnostics;

    RepoCounts totals() const;
    std::string to_text() const;
    std::string to_json() const;
};

struct StructuralBuild {
    CodeGraph graph;
    ExtractionReport report;
};

NodeId system_node_id(std::string_view system_name);
NodeId project_node_id(std::string_view project_name);

// Throws DuplicateProjectName, IoFailure, NoAdapter, InvalidArgument (no specs).
StructuralBuild build_structural_graph(const std::vector<RepoSpec>& specs, const std::string& system_name,
                                       const ExtractOptions& options = {});

} // namespace codegraph::extract
