#include <codegraph/enrich/provider.hpp>

#include <codegraph/util/text.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace codegraph::enrich {

using json = nlohmann::json;

namespace {

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string prefix; // path without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(ErrorCode::ConfigError, "endpoint needs a scheme: " + url);
    const auto path = url.find('/', scheme + 3);
    Endpoint e{url.substr(0, path), path == std::string::npos ? "" : url.substr(path)};
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
    return e;
}

} // namespace

LiveProvider::LiveProvider(LiveConfig config) : config_(std::move(config)), dimension_(config_.dimension) {
    if (config_.endpoint.empty()) throw Error(ErrorCode::ConfigError, "live provider needs an endpoint");
    split_endpoint(config_.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (util::starts_with(config_.endpoint, "https://")) {
        throw Error(ErrorCode::ConfigError, "https endpoints need a build with OpenSSL");
    }
#endif
}

std::size_t LiveProvider::dimension() const noexcept {
    std::lock_guard lock(mutex_);
    return dimension_;
}

std::string LiveProvider::post(const std::string& route, const std::string& body) const {
    const auto ep = split_endpoint(config_.endpoint);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_write_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(ep.prefix + route, headers, body, "application/json");
    if (!res) {
        throw Error(ErrorCode::ProviderFailure, "request to " + route + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::ProviderFailure, route + " returned HTTP " + std::to_string(res->status));
    }
    return res->body;
}

std::string LiveProvider::complete(std::string_view prompt, Tier tier) {
    const auto& model = tier == Tier::Fast ? config_.fast_model : config_.deep_model;
    json req{{"model", model},
             {"temperature", 0},
             {"messages", json::array({json{{"role", "user"}, {"content", std::string(prompt)}}})}};
    const auto body = post("/chat/completions", req.dump());
    try {
        const auto j = json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderFailure, std::string("unexpected completion payload: ") + e.what());
    }
}

Embedding LiveProvider::embed(std::string_view text) {
    json req{{"model", config_.embed_model}, {"input", std::string(text)}};
    const auto body = post("/embeddings", req.dump());
    Embedding v;
    try {
        const auto j = json::parse(body);
        v = j.at("data").at(0).at("embedding").get<Embedding>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderFailure, std::string("unexpected embedding payload: ") + e.what());
    }
    if (v.empty()) throw Error(ErrorCode::ProviderFailure, "empty embedding");
    {
        std::lock_guard lock(mutex_);
        if (dimension_ == 0) dimension_ = v.size();
        if (v.size() != dimension_) {
            throw Error(ErrorCode::ProviderFailure, "embedding dimension changed from " + std::to_string(dimension_) +
                                                        " to " + std::to_string(v.size()));
        }
    }
    return normalized(std::move(v));
}

} // namespace codegraph::enrich
