#pragma once

#include <codegraph/enrich/enricher.hpp>
#include <codegraph/index.hpp>
#include <codegraph/service/config.hpp>

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

namespace codegraph::service {

enum class BuildPhase { Scanning, Structural, Describing, Entities, Embedding, Done, Failed };

std::string_view to_string(BuildPhase phase) noexcept;

struct BuildOutcome {
    CodeGraph graph;
    extract::ExtractionReport extraction;
    enrich::EnrichReport enrichment;
    index::EmbedReport embedding;

    std::string summary() const;
};

// scanning -> structural -> describing -> entities -> embedding. Writes the
// snapshot when config.snapshot is set. Throws ConfigError for an invalid
// config and BuildError for anything that fails afterwards.
BuildOutcome run_build(const SystemConfig& config, enrich::LlmProvider& provider,
                       const std::function<void(BuildPhase)>& on_phase = {});

// Progress record of an asynchronous build. Phases only move forward.
class BuildJob {
public:
    explicit BuildJob(std::string id, std::string system_id) : id_(std::move(id)), system_id_(std::move(system_id)) {}

    const std::string& id() const noexcept { return id_; }
    const std::string& system_id() const noexcept { return system_id_; }

    void advance(BuildPhase phase);
    void fail(std::string message);
    void add_diagnostics(const std::vector<std::string>& lines);
    void set_counter(const std::string& name, std::size_t value);

    BuildPhase phase() const;
    bool finished() const;
    nlohmann::json to_json() const;

private:
    std::string id_;
    std::string system_id_;
    mutable std::mutex mutex_;
    BuildPhase phase_ = BuildPhase::Scanning;
    std::vector<std::string> history_{"scanning"};
    std::map<std::string, std::size_t> counters_;
    std::vector<std::string> diagnostics_;
    std::string error_;
};

} // namespace codegraph::service
