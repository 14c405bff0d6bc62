#pragma once

#include <codegraph/error.hpp>
#include <codegraph/graph.hpp>

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace codegraph::enrich {

class Transcript;

enum class Tier { Fast, Deep };
enum class ProviderMode { Live, Replay, Mock };

std::string_view to_string(Tier tier) noexcept;
std::string_view to_string(ProviderMode mode) noexcept;
std::optional<ProviderMode> parse_provider_mode(std::string_view text) noexcept;

inline constexpr std::size_t kMockDimension = 256;

// Completion and embedding calls. Implementations must be safe to call
// from several threads at once; failures throw Error(ProviderFailure) or,
// in replay mode, Error(ReplayMiss).
class LlmProvider {
public:
    virtual ~LlmProvider() = default;

    virtual std::string complete(std::string_view prompt, Tier tier) = 0;
    // Unit-norm vector of dimension(); the zero vector for token-free text.
    virtual Embedding embed(std::string_view text) = 0;
    virtual ProviderMode mode() const noexcept = 0;
    virtual std::size_t dimension() const noexcept = 0;
    // Embeddings from different families are not comparable.
    virtual std::string embedding_family() const = 0;
};

// The prompt kind marker "[task:<kind>]" on a prompt's first line.
std::string prompt_kind(std::string_view prompt);

// Hashing embedder: lowercase alphanumeric tokens, FNV-1a mod dimension,
// count accumulation, L2 normalization.
Embedding mock_embed(std::string_view text, std::size_t dimension = kMockDimension);

Embedding normalized(Embedding v);
double cosine(const Embedding& a, const Embedding& b) noexcept;

// Pure function of its input. Completions are templates keyed by prompt
// kind and the node names embedded in the prompt.
class MockProvider : public LlmProvider {
public:
    explicit MockProvider(std::size_t dimension = kMockDimension) : dimension_(dimension) {}

    std::string complete(std::string_view prompt, Tier tier) override;
    Embedding embed(std::string_view text) override { return mock_embed(text, dimension_); }
    ProviderMode mode() const noexcept override { return ProviderMode::Mock; }
    std::size_t dimension() const noexcept override { return dimension_; }
    std::string embedding_family() const override { return "mock/" + std::to_string(dimension_); }

private:
    std::size_t dimension_;
};

// Returns queued completions in order (mock embeddings). When the queue is
// empty it repeats the fallback response, or fails if none is set.
class ScriptedProvider : public LlmProvider {
public:
    explicit ScriptedProvider(std::vector<std::string> script, std::optional<std::string> fallback = std::nullopt);

    std::string complete(std::string_view prompt, Tier tier) override;
    Embedding embed(std::string_view text) override { return mock_embed(text); }
    ProviderMode mode() const noexcept override { return ProviderMode::Mock; }
    std::size_t dimension() const noexcept override { return kMockDimension; }
    std::string embedding_family() const override { return "mock/" + std::to_string(kMockDimension); }

    std::vector<std::string> prompts() const;
    std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::deque<std::string> script_;
    std::optional<std::string> fallback_;
    std::vector<std::string> prompts_;
};

struct LiveConfig {
    std::string endpoint;     // base URL of an OpenAI-compatible API, e.g. http://localhost:8080/v1
    std::string api_key;      // resolved from the environment by the caller; never persisted
    std::string fast_model;
    std::string deep_model;
    std::string embed_model;
    std::size_t dimension = 0; // expected embedding size; 0 accepts the first size seen
    int timeout_seconds = 120;
};

// OpenAI-compatible HTTP client: POST {endpoint}/chat/completions and
// POST {endpoint}/embeddings.
class LiveProvider : public LlmProvider {
public:
    explicit LiveProvider(LiveConfig config);

    std::string complete(std::string_view prompt, Tier tier) override;
    Embedding embed(std::string_view text) override;
    ProviderMode mode() const noexcept override { return ProviderMode::Live; }
    std::size_t dimension() const noexcept override;
    std::string embedding_family() const override { return "model/" + config_.embed_model; }

private:
    std::string post(const std::string& route, const std::string& body) const;

    LiveConfig config_;
    mutable std::mutex mutex_;
    std::size_t dimension_;
};

// Serves recorded responses keyed by (prompt hash, tier, occurrence index).
class ReplayProvider : public LlmProvider {
public:
    ReplayProvider(std::shared_ptr<const Transcript> transcript, std::string family, std::size_t dimension);

    std::string complete(std::string_view prompt, Tier tier) override;
    Embedding embed(std::string_view text) override;
    ProviderMode mode() const noexcept override { return ProviderMode::Replay; }
    std::size_t dimension() const noexcept override { return dimension_; }
    std::string embedding_family() const override { return family_; }

private:
    std::string lookup(std::string_view prompt, std::string_view tier);

    std::shared_ptr<const Transcript> transcript_;
    std::string family_;
    std::size_t dimension_;
    std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, std::size_t> occurrences_;
};

// Decorator that appends every call and its result to a transcript.
class RecordingProvider : public LlmProvider {
public:
    RecordingProvider(std::shared_ptr<LlmProvider> inner, std::shared_ptr<Transcript> transcript);

    std::string complete(std::string_view prompt, Tier tier) override;
    Embedding embed(std::string_view text) override;
    ProviderMode mode() const noexcept override { return inner_->mode(); }
    std::size_t dimension() const noexcept override { return inner_->dimension(); }
    std::string embedding_family() const override { return inner_->embedding_family(); }

private:
    std::shared_ptr<LlmProvider> inner_;
    std::shared_ptr<Transcript> transcript_;
};

struct RetryPolicy {
    int attempts = 3;
};

// Calls fn until it succeeds or attempts run out. Only ProviderFailure is
// retried; a ReplayMiss would miss again and propagates at once.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ProviderFailure || attempt >= policy.attempts) throw;
        }
    }
}

} // namespace codegraph::enrich
