#pragma once

#include <codegraph/agent/agent.hpp>
#include <codegraph/enrich/provider.hpp>
#include <codegraph/extract/builder.hpp>
#include <codegraph/index.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace codegraph::service {

struct ProviderSettings {
    enrich::ProviderMode mode = enrich::ProviderMode::Mock;
    std::string endpoint;
    std::string api_key_env; // name of the variable holding the key, never the key
    std::string fast_model;
    std::string deep_model;
    std::string embed_model;
    std::size_t dimension = enrich::kMockDimension;
    std::optional<std::filesystem::path> transcript;
    int timeout_seconds = 120;
};

struct SystemConfig {
    std::string system;
    std::vector<extract::RepoSpec> repos;
    ProviderSettings provider;
    index::IndexDefaults index;
    agent::AgentBudget agent;
    std::filesystem::path snapshot;
    extract::ExtractOptions extract;
    std::optional<std::filesystem::path> prompts_dir;
    std::size_t parallelism = 4;
};

// Relative paths resolve against base_dir. Throws ConfigError with the
// offending field.
SystemConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
SystemConfig load_config(const std::filesystem::path& path);

// Checks everything a build needs before it starts: repo roots exist and
// are directories, languages have adapters, replay has a transcript.
void validate_config(const SystemConfig& config);

nlohmann::json config_to_json(const SystemConfig& config);

enum class ProviderUse { Build, Session };

// Live and mock providers record into the configured transcript, if any: a
// build truncates it, sessions append. Replay loads it.
std::shared_ptr<enrich::LlmProvider> make_provider(const ProviderSettings& settings, ProviderUse use);

enrich::PromptLibrary load_prompts(const SystemConfig& config);

} // namespace codegraph::service
