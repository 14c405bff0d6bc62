#include <codegraph/index.hpp>

#include <codegraph/util/parallel.hpp>
#include <codegraph/util/text.hpp>

#include <algorithm>
#include <cmath>
#include <optional>

namespace codegraph::index {

EmbedReport embed_all(CodeGraph& graph, enrich::LlmProvider& provider, std::size_t parallelism,
                      const enrich::RetryPolicy& retry) {
    EmbedReport report;
    std::vector<NodeId> ids;
    std::vector<std::string> texts;
    for (const auto& [id, node] : graph.nodes()) {
        if (!node.description || util::trim(*node.description).empty()) {
            ++report.skipped;
            report.diagnostics.push_back(id.str() + ": no description, not embedded");
            continue;
        }
        ids.push_back(id);
        texts.push_back(*node.description);
    }

    std::vector<std::optional<Embedding>> vectors(ids.size());
    std::vector<std::string> failures(ids.size());
    util::parallel_for(ids.size(), parallelism, [&](std::size_t i) {
        try {
            vectors[i] = enrich::with_retries(retry, [&] { return provider.embed(texts[i]); });
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ProviderFailure) throw;
            failures[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!vectors[i]) {
            ++report.degraded;
            graph.set_attr(ids[i], std::string(attrs::kDegraded), failures[i]);
            report.diagnostics.push_back(ids[i].str() + ": embedding failed: " + failures[i]);
            continue;
        }
        double norm = 0.0;
        for (float x : *vectors[i]) norm += static_cast<double>(x) * x;
        if (norm == 0.0) {
            ++report.skipped;
            report.diagnostics.push_back(ids[i].str() + ": description has no tokens, not embedded");
            continue;
        }
        graph.set_embedding(ids[i], std::move(*vectors[i]));
        ++report.embedded;
    }
    graph.meta()[std::string(kFamilyMetaKey)] = provider.embedding_family();
    graph.meta()[std::string(kDimensionMetaKey)] = std::to_string(provider.dimension());
    return report;
}

SemanticIndex::SemanticIndex(const CodeGraph& graph, enrich::LlmProvider& provider, IndexDefaults defaults)
    : graph_(graph), provider_(provider), defaults_(defaults) {
    for (const auto& [id, node] : graph_.nodes()) {
        if (node.embedding) ++size_;
    }
    const auto it = graph_.meta().find(std::string(kFamilyMetaKey));
    if (size_ > 0 && it != graph_.meta().end() && it->second != provider_.embedding_family()) {
        throw Error(ErrorCode::ConfigError, "graph was embedded with " + it->second + " but the provider embeds with " +
                                                provider_.embedding_family());
    }
}

Embedding SemanticIndex::embed_query(std::string_view query) const {
    return provider_.embed(query);
}

double SemanticIndex::similarity(const Embedding& query, const NodeId& id) const {
    const auto& node = graph_.node(id);
    if (!node.embedding) return 0.0;
    return enrich::cosine(query, *node.embedding);
}

std::vector<SearchHit> SemanticIndex::search(std::string_view query, NodeKind kind, std::size_t k,
                                             double threshold) const {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (size_ == 0) throw Error(ErrorCode::EmptyIndex, "no node has an embedding");
    return search_vector(embed_query(query), kind, k, threshold);
}

std::vector<SearchHit> SemanticIndex::search_vector(const Embedding& query, NodeKind kind, std::size_t k,
                                                    double threshold) const {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (size_ == 0) throw Error(ErrorCode::EmptyIndex, "no node has an embedding");
    std::vector<SearchHit> hits;
    for (const auto& [id, node] : graph_.nodes()) {
        if (node.kind != kind || !node.embedding) continue;
        const double score = enrich::cosine(query, *node.embedding);
        if (score >= threshold) hits.push_back({id, score});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

} // namespace codegraph::index
