#include <codegraph/service/config.hpp>

#include <codegraph/enrich/transcript.hpp>
#include <codegraph/extract/adapter.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

namespace codegraph::service {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& message) {
    throw Error(ErrorCode::ConfigError, field + ": " + message);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad(where, "must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) bad(where.empty() ? key : where + "." + key, "unknown field");
    }
}

std::string get_string(const json& obj, const char* key, const std::string& where, bool required,
                       std::string fallback = {}) {
    const std::string field = where.empty() ? key : where + "." + key;
    if (!obj.contains(key)) {
        if (required) bad(field, "is required");
        return fallback;
    }
    if (!obj[key].is_string()) bad(field, "must be a string");
    return obj[key].get<std::string>();
}

template <typename T>
T get_number(const json& obj, const char* key, const std::string& where, T fallback) {
    const std::string field = where.empty() ? key : where + "." + key;
    if (!obj.contains(key)) return fallback;
    const auto& v = obj[key];
    if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) bad(field, "must be a number");
    } else {
        if (!v.is_number_integer() || v.get<long long>() < 0) bad(field, "must be a non-negative integer");
    }
    return v.get<T>();
}

std::vector<std::string> get_strings(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) return {};
    const auto& v = obj[key];
    if (!v.is_array()) bad(where + "." + key, "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) bad(where + "." + key, "must be an array of strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

} // namespace

SystemConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    only_keys(doc, "", {"system", "repos", "provider", "index", "agent", "snapshot", "extract", "prompts_dir",
                        "parallelism"});
    SystemConfig c;
    c.system = get_string(doc, "system", "", true);
    if (c.system.empty()) bad("system", "must not be empty");

    if (!doc.contains("repos") || !doc["repos"].is_array() || doc["repos"].empty()) {
        bad("repos", "must be a non-empty array");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < doc["repos"].size(); ++i) {
        const auto& r = doc["repos"][i];
        const auto where = "repos[" + std::to_string(i) + "]";
        only_keys(r, where, {"name", "root", "language", "include", "exclude", "url"});
        extract::RepoSpec spec;
        spec.name = get_string(r, "name", where, true);
        if (spec.name.empty()) bad(where + ".name", "must not be empty");
        if (!names.insert(spec.name).second) bad(where + ".name", "duplicate project name " + spec.name);
        spec.root = resolve(base_dir, get_string(r, "root", where, true));
        spec.language = get_string(r, "language", where, true);
        spec.include = get_strings(r, "include", where);
        spec.exclude = get_strings(r, "exclude", where);
        spec.url = get_string(r, "url", where, false);
        c.repos.push_back(std::move(spec));
    }

    if (doc.contains("provider")) {
        const auto& p = doc["provider"];
        only_keys(p, "provider", {"mode", "endpoint", "api_key_env", "fast_model", "deep_model", "embed_model",
                                  "dimension", "transcript", "timeout_seconds"});
        const auto mode = get_string(p, "mode", "provider", false, "mock");
        const auto parsed = enrich::parse_provider_mode(mode);
        if (!parsed) bad("provider.mode", "must be live, replay or mock, got \"" + mode + "\"");
        c.provider.mode = *parsed;
        c.provider.endpoint = get_string(p, "endpoint", "provider", false);
        c.provider.api_key_env = get_string(p, "api_key_env", "provider", false);
        c.provider.fast_model = get_string(p, "fast_model", "provider", false);
        c.provider.deep_model = get_string(p, "deep_model", "provider", false);
        c.provider.embed_model = get_string(p, "embed_model", "provider", false);
        c.provider.dimension = get_number<std::size_t>(p, "dimension", "provider",
                                                      c.provider.mode == enrich::ProviderMode::Live ? 0 : enrich::kMockDimension);
        c.provider.timeout_seconds = get_number<int>(p, "timeout_seconds", "provider", 120);
        if (p.contains("transcript")) c.provider.transcript = resolve(base_dir, get_string(p, "transcript", "provider", true));
    }

    if (doc.contains("index")) {
        const auto& x = doc["index"];
        only_keys(x, "index", {"k", "threshold"});
        c.index.k = get_number<std::size_t>(x, "k", "index", c.index.k);
        c.index.threshold = get_number<double>(x, "threshold", "index", c.index.threshold);
    }
    if (doc.contains("agent")) {
        const auto& a = doc["agent"];
        only_keys(a, "agent", {"max_steps", "obs_tokens", "repair_retries"});
        c.agent.max_steps = get_number<std::size_t>(a, "max_steps", "agent", c.agent.max_steps);
        c.agent.obs_tokens = get_number<std::size_t>(a, "obs_tokens", "agent", c.agent.obs_tokens);
        c.agent.repair_retries = get_number<int>(a, "repair_retries", "agent", c.agent.repair_retries);
    }
    if (doc.contains("extract")) {
        const auto& e = doc["extract"];
        only_keys(e, "extract", {"promote_methods", "max_file_bytes"});
        if (e.contains("promote_methods")) {
            if (!e["promote_methods"].is_boolean()) bad("extract.promote_methods", "must be a boolean");
            c.extract.promote_methods = e["promote_methods"].get<bool>();
        }
        c.extract.max_file_bytes = get_number<std::uintmax_t>(e, "max_file_bytes", "extract", c.extract.max_file_bytes);
    }
    const auto snapshot = get_string(doc, "snapshot", "", false);
    if (!snapshot.empty()) c.snapshot = resolve(base_dir, snapshot);
    if (doc.contains("prompts_dir")) c.prompts_dir = resolve(base_dir, get_string(doc, "prompts_dir", "", true));
    c.parallelism = get_number<std::size_t>(doc, "parallelism", "", c.parallelism);
    c.extract.workers = c.parallelism;

    if (c.index.k == 0) bad("index.k", "must be at least 1");
    if (c.index.threshold < -1.0 || c.index.threshold > 1.0) bad("index.threshold", "must lie in [-1, 1]");
    if (c.agent.max_steps == 0) bad("agent.max_steps", "must be at least 1");
    if (c.agent.obs_tokens == 0) bad("agent.obs_tokens", "must be at least 1");
    if (c.provider.dimension == 0 && c.provider.mode == enrich::ProviderMode::Mock) {
        bad("provider.dimension", "must be positive");
    }
    if (c.parallelism == 0) bad("parallelism", "must be at least 1");
    return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    auto base = std::filesystem::absolute(path).parent_path();
    return parse_config(doc, base);
}

void validate_config(const SystemConfig& c) {
    const auto keys = extract::adapter_keys();
    for (const auto& r : c.repos) {
        std::error_code ec;
        if (!std::filesystem::exists(r.root, ec)) bad("repos." + r.name + ".root", "path does not exist: " + r.root.string());
        if (!std::filesystem::is_directory(r.root, ec)) {
            bad("repos." + r.name + ".root", "not a directory: " + r.root.string());
        }
        if (std::find(keys.begin(), keys.end(), r.language) == keys.end()) {
            bad("repos." + r.name + ".language", "no adapter for \"" + r.language + "\"");
        }
    }
    const auto& p = c.provider;
    switch (p.mode) {
    case enrich::ProviderMode::Mock: break;
    case enrich::ProviderMode::Replay:
        if (!p.transcript) bad("provider.transcript", "replay mode needs a transcript");
        if (!std::filesystem::exists(*p.transcript)) bad("provider.transcript", "not found: " + p.transcript->string());
        break;
    case enrich::ProviderMode::Live:
        if (p.endpoint.empty()) bad("provider.endpoint", "live mode needs an endpoint");
        if (p.fast_model.empty() || p.deep_model.empty() || p.embed_model.empty()) {
            bad("provider", "live mode needs fast_model, deep_model and embed_model");
        }
        if (!p.api_key_env.empty() && !std::getenv(p.api_key_env.c_str())) {
            bad("provider.api_key_env", "environment variable " + p.api_key_env + " is not set");
        }
        break;
    }
    if (c.prompts_dir && !std::filesystem::is_directory(*c.prompts_dir)) {
        bad("prompts_dir", "not a directory: " + c.prompts_dir->string());
    }
}

json config_to_json(const SystemConfig& c) {
    json repos = json::array();
    for (const auto& r : c.repos) {
        repos.push_back({{"name", r.name},
                         {"root", r.root.string()},
                         {"language", r.language},
                         {"include", r.include},
                         {"exclude", r.exclude},
                         {"url", r.url}});
    }
    json provider{{"mode", enrich::to_string(c.provider.mode)},
                  {"endpoint", c.provider.endpoint},
                  {"api_key_env", c.provider.api_key_env},
                  {"fast_model", c.provider.fast_model},
                  {"deep_model", c.provider.deep_model},
                  {"embed_model", c.provider.embed_model},
                  {"dimension", c.provider.dimension},
                  {"timeout_seconds", c.provider.timeout_seconds}};
    if (c.provider.transcript) provider["transcript"] = c.provider.transcript->string();
    json j{{"system", c.system},
           {"repos", repos},
           {"provider", provider},
           {"index", {{"k", c.index.k}, {"threshold", c.index.threshold}}},
           {"agent",
            {{"max_steps", c.agent.max_steps},
             {"obs_tokens", c.agent.obs_tokens},
             {"repair_retries", c.agent.repair_retries}}},
           {"extract",
            {{"promote_methods", c.extract.promote_methods}, {"max_file_bytes", c.extract.max_file_bytes}}},
           {"parallelism", c.parallelism}};
    if (!c.snapshot.empty()) j["snapshot"] = c.snapshot.string();
    if (c.prompts_dir) j["prompts_dir"] = c.prompts_dir->string();
    return j;
}

std::shared_ptr<enrich::LlmProvider> make_provider(const ProviderSettings& s, ProviderUse use) {
    std::shared_ptr<enrich::LlmProvider> base;
    switch (s.mode) {
    case enrich::ProviderMode::Replay: {
        if (!s.transcript) throw Error(ErrorCode::ConfigError, "provider.transcript: replay mode needs a transcript");
        std::shared_ptr<const enrich::Transcript> t = enrich::Transcript::load(*s.transcript);
        const auto info = t->embedding_info();
        const auto family = info ? info->first : "mock/" + std::to_string(s.dimension);
        const auto dim = info ? info->second : s.dimension;
        return std::make_shared<enrich::ReplayProvider>(std::move(t), family, dim);
    }
    case enrich::ProviderMode::Mock:
        base = std::make_shared<enrich::MockProvider>(s.dimension);
        break;
    case enrich::ProviderMode::Live: {
        enrich::LiveConfig lc;
        lc.endpoint = s.endpoint;
        if (!s.api_key_env.empty()) {
            if (const char* key = std::getenv(s.api_key_env.c_str())) lc.api_key = key;
        }
        lc.fast_model = s.fast_model;
        lc.deep_model = s.deep_model;
        lc.embed_model = s.embed_model;
        lc.dimension = s.dimension;
        lc.timeout_seconds = s.timeout_seconds;
        base = std::make_shared<enrich::LiveProvider>(std::move(lc));
        break;
    }
    }
    if (!s.transcript) return base;
    std::shared_ptr<enrich::Transcript> sink;
    if (use == ProviderUse::Build || !std::filesystem::exists(*s.transcript)) {
        sink = std::make_shared<enrich::Transcript>(*s.transcript);
    } else {
        sink = std::make_shared<enrich::Transcript>(*s.transcript, true);
    }
    return std::make_shared<enrich::RecordingProvider>(base, sink);
}

enrich::PromptLibrary load_prompts(const SystemConfig& config) {
    return config.prompts_dir ? enrich::PromptLibrary::from_directory(*config.prompts_dir)
                              : enrich::PromptLibrary::defaults();
}

} // namespace codegraph::service
