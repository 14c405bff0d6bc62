#include <codegraph/service/pipeline.hpp>

#include <codegraph/extract/adapter.hpp>
#include <codegraph/extract/scanner.hpp>
#include <codegraph/snapshot.hpp>

#include <cstdlib>

namespace codegraph::service {

using json = nlohmann::json;

std::string_view to_string(BuildPhase phase) noexcept {
    switch (phase) {
    case BuildPhase::Scanning: return "scanning";
    case BuildPhase::Structural: return "structural";
    case BuildPhase::Describing: return "describing";
    case BuildPhase::Entities: return "entities";
    case BuildPhase::Embedding: return "embedding";
    case BuildPhase::Done: return "done";
    case BuildPhase::Failed: return "failed";
    }
    return "failed";
}

std::string BuildOutcome::summary() const {
    std::string out = extraction.to_text();
    out += "nodes: " + std::to_string(graph.node_count()) + "  edges: " + std::to_string(graph.edge_count()) + "\n";
    for (auto kind : {NodeKind::System, NodeKind::Project, NodeKind::Code, NodeKind::Entity}) {
        out += std::string(to_string(kind)) + ": " + std::to_string(graph.nodes_of_kind(kind).size()) + "\n";
    }
    out += "described: " + std::to_string(enrichment.described) + "  degraded: " +
           std::to_string(enrichment.degraded + embedding.degraded) + "  entities: " +
           std::to_string(enrichment.entities) + "  embedded: " + std::to_string(embedding.embedded) + "\n";
    return out;
}

BuildOutcome run_build(const SystemConfig& config, enrich::LlmProvider& provider,
                       const std::function<void(BuildPhase)>& on_phase) {
    auto phase = [&](BuildPhase p) {
        if (on_phase) on_phase(p);
    };
    phase(BuildPhase::Scanning);
    validate_config(config);
    const auto prompts = load_prompts(config);

    try {
        for (const auto& spec : config.repos) {
            auto adapter = extract::make_adapter(spec.language);
            extract::scan_repository(spec, *adapter, config.extract.max_file_bytes);
        }

        phase(BuildPhase::Structural);
        auto structural = extract::build_structural_graph(config.repos, config.system, config.extract);
        BuildOutcome out{std::move(structural.graph), std::move(structural.report), {}, {}};

        phase(BuildPhase::Describing);
        enrich::EnrichOptions options;
        options.parallelism = config.parallelism;
        options.prompts = prompts;
        out.enrichment = enrich::enrich_graph(out.graph, provider, options, [&](enrich::EnrichStage stage) {
            if (stage == enrich::EnrichStage::Entities) phase(BuildPhase::Entities);
        });

        phase(BuildPhase::Embedding);
        out.embedding = index::embed_all(out.graph, provider, config.parallelism);

        if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) out.graph.meta()["created"] = epoch;
        out.graph.validate();
        if (!config.snapshot.empty()) save_snapshot(out.graph, config.snapshot);
        phase(BuildPhase::Done);
        return out;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::BuildError) throw;
        throw Error(ErrorCode::BuildError, std::string(codegraph::to_string(e.code())) + ": " + e.what());
    }
}

void BuildJob::advance(BuildPhase phase) {
    std::lock_guard lock(mutex_);
    if (phase_ == BuildPhase::Done || phase_ == BuildPhase::Failed) return;
    if (static_cast<int>(phase) <= static_cast<int>(phase_)) return;
    phase_ = phase;
    history_.emplace_back(to_string(phase));
}

void BuildJob::fail(std::string message) {
    std::lock_guard lock(mutex_);
    if (phase_ == BuildPhase::Done || phase_ == BuildPhase::Failed) return;
    phase_ = BuildPhase::Failed;
    history_.emplace_back(to_string(BuildPhase::Failed));
    error_ = std::move(message);
}

void BuildJob::add_diagnostics(const std::vector<std::string>& lines) {
    std::lock_guard lock(mutex_);
    diagnostics_.insert(diagnostics_.end(), lines.begin(), lines.end());
}

void BuildJob::set_counter(const std::string& name, std::size_t value) {
    std::lock_guard lock(mutex_);
    counters_[name] = value;
}

BuildPhase BuildJob::phase() const {
    std::lock_guard lock(mutex_);
    return phase_;
}

bool BuildJob::finished() const {
    const auto p = phase();
    return p == BuildPhase::Done || p == BuildPhase::Failed;
}

json BuildJob::to_json() const {
    std::lock_guard lock(mutex_);
    json j{{"jobId", id_},
           {"systemId", system_id_},
           {"phase", to_string(phase_)},
           {"phases", history_},
           {"counters", counters_},
           {"diagnostics", diagnostics_}};
    if (!error_.empty()) j["error"] = error_;
    return j;
}

} // namespace codegraph::service
