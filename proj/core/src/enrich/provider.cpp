#include <codegraph/enrich/provider.hpp>

#include <codegraph/enrich/transcript.hpp>
#include <codegraph/util/text.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <map>
#include <set>

namespace codegraph::enrich {

using json = nlohmann::json;

std::string_view to_string(Tier tier) noexcept {
    return tier == Tier::Fast ? "fast" : "deep";
}

std::string_view to_string(ProviderMode mode) noexcept {
    switch (mode) {
    case ProviderMode::Live: return "live";
    case ProviderMode::Replay: return "replay";
    case ProviderMode::Mock: return "mock";
    }
    return "mock";
}

std::optional<ProviderMode> parse_provider_mode(std::string_view text) noexcept {
    if (text == "live") return ProviderMode::Live;
    if (text == "replay") return ProviderMode::Replay;
    if (text == "mock") return ProviderMode::Mock;
    return std::nullopt;
}

std::string prompt_kind(std::string_view prompt) {
    const auto eol = prompt.find('\n');
    const auto first = util::trim(prompt.substr(0, eol));
    constexpr std::string_view open = "[task:";
    if (!util::starts_with(first, open) || first.back() != ']') return {};
    return std::string(first.substr(open.size(), first.size() - open.size() - 1));
}

Embedding normalized(Embedding v) {
    double sum = 0.0;
    for (float x : v) sum += static_cast<double>(x) * x;
    if (sum <= 0.0) return v;
    const double inv = 1.0 / std::sqrt(sum);
    for (float& x : v) x = static_cast<float>(x * inv);
    return v;
}

double cosine(const Embedding& a, const Embedding& b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Embedding mock_embed(std::string_view text, std::size_t dimension) {
    if (dimension == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be positive");
    Embedding v(dimension, 0.0f);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        v[util::fnv1a32(token) % dimension] += 1.0f;
        token.clear();
    };
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            token.push_back(static_cast<char>(std::tolower(u)));
        } else {
            flush();
        }
    }
    flush();
    return normalized(std::move(v));
}

namespace {

std::string line_value(std::string_view prompt, std::string_view key) {
    for (auto line : util::split_lines(prompt)) {
        if (util::starts_with(line, key)) return std::string(util::trim(line.substr(key.size())));
    }
    return {};
}

struct ListedItem {
    std::string id;
    std::string name;
};

// "TAG <id> | <name> | <text>" lines.
std::vector<ListedItem> listed(std::string_view prompt, std::string_view tag) {
    std::vector<ListedItem> out;
    std::string prefix = std::string(tag) + " ";
    for (auto line : util::split_lines(prompt)) {
        if (!util::starts_with(line, prefix)) continue;
        auto parts = util::split(line.substr(prefix.size()), '|');
        if (parts.size() < 2) continue;
        out.push_back({std::string(util::trim(parts[0])), std::string(util::trim(parts[1]))});
    }
    return out;
}

std::string words_of(std::string_view name) {
    std::vector<std::string> words;
    for (auto& w : util::split_identifier(name)) words.push_back(util::to_lower(w));
    return util::join(words, " ");
}

struct SuffixRule {
    std::string_view suffix;
    std::string_view verb;
};

constexpr SuffixRule kSuffixRules[] = {
    {"Controller", "CREATE"},  {"Processor", "PROCESS"},  {"Service", "MANAGE"},
    {"Handler", "HANDLE"},     {"Producer", "PRODUCE"},   {"Publisher", "PRODUCE"},
    {"Consumer", "CONSUME"},   {"Listener", "CONSUME"},   {"Repository", "STORE"},
    {"Dao", "STORE"},          {"Store", "STORE"},        {"Validator", "VALIDATE"},
    {"Configuration", "CONFIGURE"}, {"Config", "CONFIGURE"}, {"Client", "REQUEST"},
    {"Model", "REPRESENTS"},   {"DTO", "REPRESENTS"},     {"Dto", "REPRESENTS"},
    {"Entity", "REPRESENTS"},  {"Record", "REPRESENTS"},  {"Event", "REPRESENTS"},
};

std::string mock_entities(std::string_view prompt) {
    std::map<std::string, json> by_stem;
    for (const auto& unit : listed(prompt, "UNIT")) {
        for (const auto& rule : kSuffixRules) {
            if (!util::ends_with(unit.name, rule.suffix) || unit.name.size() == rule.suffix.size()) continue;
            const std::string stem = unit.name.substr(0, unit.name.size() - rule.suffix.size());
            auto& e = by_stem[stem];
            if (e.is_null()) {
                e = json{{"name", stem},
                         {"description", "Domain entity " + stem + "."},
                         {"operations", json::array()},
                         {"representedBy", json::array()}};
            }
            if (rule.verb == "REPRESENTS") {
                e["representedBy"].push_back(unit.id);
            } else {
                e["operations"].push_back({{"codeUid", unit.id}, {"verb", rule.verb}});
            }
            break;
        }
    }
    json out{{"entities", json::array()}};
    for (auto& [stem, e] : by_stem) out["entities"].push_back(std::move(e));
    return out.dump();
}

std::string mock_agent(std::string_view prompt, bool forced) {
    const auto question = line_value(prompt, "Question:");
    const bool observed = prompt.find("\nObservation:") != std::string_view::npos;
    if (!observed && !forced) {
        static const std::set<std::string> stop{"a",    "an",   "and",   "are",   "does", "do",    "for",  "how",
                                                "i",    "in",   "is",    "it",    "of",   "on",    "or",   "the",
                                                "to",   "what", "where", "which", "who",  "why",   "with", "work",
                                                "am",   "be",   "can",   "my",    "this", "that",  "must", "should"};
        std::vector<std::string> words;
        std::string token;
        auto flush = [&] {
            if (!token.empty() && !stop.count(token)) words.push_back(token);
            token.clear();
        };
        for (char c : question) {
            const auto u = static_cast<unsigned char>(c);
            if (std::isalnum(u)) {
                token.push_back(static_cast<char>(std::tolower(u)));
            } else {
                flush();
            }
        }
        flush();
        const auto query = words.empty() ? question : util::join(words, " ");
        return "Thought: I should look up the domain entities related to the question.\nACTION entities_tool " +
               json{{"query", query}, {"threshold", 0.2}}.dump();
    }
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (auto line : util::split_lines(prompt)) {
        if (line.empty() || line.front() != '[') continue;
        const auto colon = line.find(": ");
        if (line.find("] ") == std::string_view::npos || colon == std::string_view::npos) continue;
        auto rest = line.substr(colon + 2);
        const auto dash = rest.find(" \xE2\x80\x94 ");
        auto name = std::string(util::trim(rest.substr(0, dash)));
        if (!name.empty() && seen.insert(name).second) names.push_back(name);
    }
    if (names.empty()) return "FINAL: No relevant components were found for: " + question;
    return "FINAL: Relevant components for \"" + question + "\": " + util::join(names, ", ") + ".";
}

} // namespace

std::string MockProvider::complete(std::string_view prompt, Tier /*tier*/) {
    const auto kind = prompt_kind(prompt);
    if (kind == "describe_code") {
        const auto name = line_value(prompt, "Unit:");
        const auto unit_kind = line_value(prompt, "Kind:");
        const auto project = line_value(prompt, "Project:");
        return "Summary of " + name + ": " + words_of(name) + " " + unit_kind + " in " + project + ".";
    }
    if (kind == "describe_project") {
        const auto project = line_value(prompt, "Project:");
        auto units = listed(prompt, "UNIT");
        std::vector<std::string> names;
        for (const auto& u : units) names.push_back(u.name);
        return "Project " + project + " groups " + std::to_string(units.size()) + " code units: " +
               util::join(names, ", ") + ".";
    }
    if (kind == "describe_system") {
        const auto system = line_value(prompt, "System:");
        auto projects = listed(prompt, "PROJECT");
        std::vector<std::string> names;
        for (const auto& p : projects) names.push_back(p.name);
        return "System " + system + " consists of " + std::to_string(projects.size()) +
               " projects: " + util::join(names, ", ") + ".";
    }
    if (kind == "extract_entities" || kind == "extract_entities_repair") return mock_entities(prompt);
    if (kind == "agent") return mock_agent(prompt, false);
    if (kind == "agent_final") return mock_agent(prompt, true);
    return "Mock response " + util::hash_hex(prompt) + ".";
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> script, std::optional<std::string> fallback)
    : script_(script.begin(), script.end()), fallback_(std::move(fallback)) {}

std::string ScriptedProvider::complete(std::string_view prompt, Tier /*tier*/) {
    std::lock_guard lock(mutex_);
    prompts_.emplace_back(prompt);
    if (script_.empty()) {
        if (fallback_) return *fallback_;
        throw Error(ErrorCode::ProviderFailure, "scripted provider exhausted");
    }
    auto next = std::move(script_.front());
    script_.pop_front();
    return next;
}

std::vector<std::string> ScriptedProvider::prompts() const {
    std::lock_guard lock(mutex_);
    return prompts_;
}

std::size_t ScriptedProvider::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size();
}

namespace {

std::string encode_embedding(const Embedding& v) {
    std::string bytes(v.size() * 4, '\0');
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &v[i], 4);
        for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    return util::base64_encode(bytes);
}

Embedding decode_embedding(std::string_view text) {
    const auto bytes = util::base64_decode(text);
    if (bytes.size() % 4 != 0) throw Error(ErrorCode::ReplayMiss, "recorded embedding has a partial float");
    Embedding v(bytes.size() / 4);
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
        std::memcpy(&v[i], &bits, 4);
    }
    return v;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

ReplayProvider::ReplayProvider(std::shared_ptr<const Transcript> transcript, std::string family, std::size_t dimension)
    : transcript_(std::move(transcript)), family_(std::move(family)), dimension_(dimension) {
    if (!transcript_) throw Error(ErrorCode::InvalidArgument, "replay needs a transcript");
}

std::string ReplayProvider::lookup(std::string_view prompt, std::string_view tier) {
    const auto hash = util::hash_hex(prompt);
    std::lock_guard lock(mutex_);
    auto& next = occurrences_[{hash, std::string(tier)}];
    auto record = transcript_->find(hash, tier, next);
    if (!record || record->prompt != prompt) {
        throw Error(ErrorCode::ReplayMiss, "no recorded " + std::string(tier) + " response for prompt " + hash +
                                               " (occurrence " + std::to_string(next) + ")");
    }
    ++next;
    return record->response;
}

std::string ReplayProvider::complete(std::string_view prompt, Tier tier) {
    return lookup(prompt, to_string(tier));
}

Embedding ReplayProvider::embed(std::string_view text) {
    auto v = decode_embedding(lookup(text, "embed"));
    if (v.size() != dimension_) {
        throw Error(ErrorCode::ReplayMiss, "recorded embedding has dimension " + std::to_string(v.size()));
    }
    return v;
}

RecordingProvider::RecordingProvider(std::shared_ptr<LlmProvider> inner, std::shared_ptr<Transcript> transcript)
    : inner_(std::move(inner)), transcript_(std::move(transcript)) {
    if (!inner_ || !transcript_) throw Error(ErrorCode::InvalidArgument, "recording needs a provider and a transcript");
    if (inner_->dimension() > 0) transcript_->set_embedding_info(inner_->embedding_family(), inner_->dimension());
}

std::string RecordingProvider::complete(std::string_view prompt, Tier tier) {
    auto response = inner_->complete(prompt, tier);
    transcript_->append({util::hash_hex(prompt), std::string(to_string(tier)), std::string(prompt), response, utc_now()});
    return response;
}

Embedding RecordingProvider::embed(std::string_view text) {
    auto v = inner_->embed(text);
    transcript_->set_embedding_info(inner_->embedding_family(), v.size());
    transcript_->append({util::hash_hex(text), "embed", std::string(text), encode_embedding(v), utc_now()});
    return v;
}

} // namespace codegraph::enrich
