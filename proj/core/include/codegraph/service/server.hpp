#pragma once

#include <codegraph/service/config.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace codegraph::service {

using ProviderFactory = std::function<std::shared_ptr<enrich::LlmProvider>(const SystemConfig&, ProviderUse)>;

struct ServerOptions {
    // Defaults to make_provider on the config's provider settings.
    ProviderFactory provider_factory;
    // Where chat traces are written; empty keeps them in memory only.
    std::optional<std::filesystem::path> trace_dir;
};

// JSON-over-HTTP API:
//   POST /api/systems                       register a config -> {systemId}
//   POST /api/systems/{id}/build            start a build -> {jobId}
//   GET  /api/jobs/{jobId}                  build progress
//   GET  /api/systems/{id}/graph            paged nodes and edges
//   GET  /api/systems/{id}/nodes/{nodeId}   node detail
//   POST /api/systems/{id}/query            {query} -> rows
//   POST /api/systems/{id}/chat             {question} -> text/event-stream
//   GET  /api/systems/{id}/traces/{traceId} stored trace (JSON lines)
class ApiServer {
public:
    explicit ApiServer(ServerOptions options = {});
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Registers a system directly; loads its snapshot when one exists.
    // Throws ConfigError.
    std::string register_system(const SystemConfig& config);

    // Binds and serves until stop(); returns false when binding fails.
    bool listen(const std::string& host, int port);
    // Binds to an ephemeral port and returns it (or -1); serve with run().
    int bind_any(const std::string& host);
    bool run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace codegraph::service
