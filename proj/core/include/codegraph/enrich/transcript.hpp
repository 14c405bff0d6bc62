#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codegraph::enrich {

struct TranscriptRecord {
    std::string hash; // hash_hex of the prompt
    std::string tier; // "fast", "deep" or "embed"
    std::string prompt;
    std::string response; // embeddings: base64 little-endian f32
    std::string timestamp;

    friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

// Append-only call log. When bound to a file, each append is written through
// as one JSON line.
class Transcript {
public:
    Transcript() = default;
    // Binds to a sink file, truncating it unless append is set; appending
    // keeps the records already in the file.
    explicit Transcript(std::filesystem::path sink, bool append = false);

    static std::shared_ptr<Transcript> load(const std::filesystem::path& path);

    // Embedding family and dimension of the recorded provider. Only the
    // first call has an effect.
    void set_embedding_info(std::string family, std::size_t dimension);
    std::optional<std::pair<std::string, std::size_t>> embedding_info() const;

    void append(TranscriptRecord record);
    std::vector<TranscriptRecord> records() const;
    std::size_t size() const;

    // The n-th record (0-based) with matching hash and tier.
    std::optional<TranscriptRecord> find(std::string_view hash, std::string_view tier, std::size_t occurrence) const;

    void save(const std::filesystem::path& path) const;

private:
    mutable std::mutex mutex_;
    std::vector<TranscriptRecord> records_;
    std::optional<std::filesystem::path> sink_;
    std::optional<std::pair<std::string, std::size_t>> info_;
};

} // namespace codegraph::enrich
