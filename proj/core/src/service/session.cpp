#include <codegraph/service/session.hpp>

#include <codegraph/snapshot.hpp>

namespace codegraph::service {

Session::Session(const SystemConfig& config, CodeGraph graph, std::shared_ptr<enrich::LlmProvider> provider)
    : graph_(std::move(graph)), provider_(std::move(provider)) {
    index_ = std::make_unique<index::SemanticIndex>(graph_, *provider_, config.index);
    tools_ = std::make_unique<agent::Toolbox>(graph_, *index_, config.agent.obs_tokens);
    agent_ = std::make_unique<agent::ReactAgent>(*tools_, *provider_, config.agent, load_prompts(config));
}

std::shared_ptr<Session> open_session(const SystemConfig& config) {
    if (config.snapshot.empty()) throw Error(ErrorCode::ConfigError, "snapshot: no snapshot path configured");
    if (!std::filesystem::exists(config.snapshot)) {
        throw Error(ErrorCode::ConfigError, "snapshot: " + config.snapshot.string() + " not found; run build first");
    }
    auto graph = load_snapshot(config.snapshot);
    return std::make_shared<Session>(config, std::move(graph), make_provider(config.provider, ProviderUse::Session));
}

} // namespace codegraph::service
