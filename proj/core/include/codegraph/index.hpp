#pragma once

#include <codegraph/enrich/provider.hpp>
#include <codegraph/graph.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace codegraph::index {

struct IndexDefaults {
    std::size_t k = 5;
    double threshold = 0.35;
};

struct SearchHit {
    NodeId id;
    double score = 0.0;

    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

struct EmbedReport {
    std::size_t embedded = 0;
    std::size_t skipped = 0;  // no usable description
    std::size_t degraded = 0; // provider failure
    std::vector<std::string> diagnostics;
};

inline constexpr std::string_view kFamilyMetaKey = "embedding.family";
inline constexpr std::string_view kDimensionMetaKey = "embedding.dimension";

// Embeds every described node and records the embedding family in meta.
EmbedReport embed_all(CodeGraph& graph, enrich::LlmProvider& provider, std::size_t parallelism = 4,
                      const enrich::RetryPolicy& retry = {});

// Exact cosine scan over the embedded nodes of one kind. The graph must
// outlive the index.
class SemanticIndex {
public:
    // Throws ConfigError when the provider's embedding family differs from
    // the one the graph was embedded with.
    SemanticIndex(const CodeGraph& graph, enrich::LlmProvider& provider, IndexDefaults defaults = {});

    const IndexDefaults& defaults() const noexcept { return defaults_; }
    std::size_t size() const noexcept { return size_; }

    // Top-k hits of the kind with score >= threshold, ordered by (score desc,
    // id asc). Throws EmptyIndex when no node is embedded, InvalidArgument for k == 0.
    std::vector<SearchHit> search(std::string_view query, NodeKind kind, std::size_t k, double threshold) const;
    std::vector<SearchHit> search(std::string_view query, NodeKind kind) const {
        return search(query, kind, defaults_.k, defaults_.threshold);
    }
    std::vector<SearchHit> search_vector(const Embedding& query, NodeKind kind, std::size_t k,
                                         double threshold) const;

    Embedding embed_query(std::string_view query) const;
    double similarity(const Embedding& query, const NodeId& id) const;

private:
    const CodeGraph& graph_;
    enrich::LlmProvider& provider_;
    IndexDefaults defaults_;
    std::size_t size_ = 0;
};

} // namespace codegraph::index
