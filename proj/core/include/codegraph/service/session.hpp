#pragma once

#include <codegraph/agent/agent.hpp>
#include <codegraph/index.hpp>
#include <codegraph/query.hpp>
#include <codegraph/service/config.hpp>

#include <memory>

namespace codegraph::service {

// A loaded graph with everything needed to answer questions over it.
// Members reference each other, so a Session is never copied or moved.
class Session {
public:
    Session(const SystemConfig& config, CodeGraph graph, std::shared_ptr<enrich::LlmProvider> provider);
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const CodeGraph& graph() const noexcept { return graph_; }
    enrich::LlmProvider& provider() const noexcept { return *provider_; }
    const index::SemanticIndex& index() const noexcept { return *index_; }
    const agent::Toolbox& tools() const noexcept { return *tools_; }
    const agent::ReactAgent& agent() const noexcept { return *agent_; }

private:
    CodeGraph graph_;
    std::shared_ptr<enrich::LlmProvider> provider_;
    std::unique_ptr<index::SemanticIndex> index_;
    std::unique_ptr<agent::Toolbox> tools_;
    std::unique_ptr<agent::ReactAgent> agent_;
};

// Loads config.snapshot (ConfigError when missing) and opens a session with a
// session-use provider.
std::shared_ptr<Session> open_session(const SystemConfig& config);

// {"count": n} or {"columns": [...], "rows": [[id, ...], ...]}; shared by the
// CLI and the HTTP API.
nlohmann::json query_rows_json(const QueryRows& rows);

} // namespace codegraph::service
