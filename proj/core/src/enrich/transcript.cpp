#include <codegraph/enrich/transcript.hpp>

#include <codegraph/error.hpp>

#include <nlohmann/json.hpp>

#include <fstream>

namespace codegraph::enrich {

using json = nlohmann::json;

namespace {

json to_json(const TranscriptRecord& r) {
    return json{{"hash", r.hash}, {"tier", r.tier}, {"prompt", r.prompt}, {"response", r.response},
                {"timestamp", r.timestamp}};
}

void append_line(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write transcript " + path.string());
    out << j.dump() << '\n';
}

} // namespace

Transcript::Transcript(std::filesystem::path sink, bool append) {
    if (sink.has_parent_path()) std::filesystem::create_directories(sink.parent_path());
    if (append && std::filesystem::exists(sink)) {
        auto existing = load(sink);
        records_ = std::move(existing->records_);
        info_ = existing->info_;
    }
    sink_ = std::move(sink);
    std::ofstream out(*sink_, (append ? std::ios::app : std::ios::trunc) | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot create transcript " + sink_->string());
}

std::shared_ptr<Transcript> Transcript::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read transcript " + path.string());
    auto out = std::make_shared<Transcript>();
    auto& t = *out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            if (j.contains("meta")) {
                t.info_.emplace(j["meta"].at("family").get<std::string>(), j["meta"].at("dimension").get<std::size_t>());
                continue;
            }
            t.records_.push_back({j.at("hash").get<std::string>(), j.at("tier").get<std::string>(),
                                  j.at("prompt").get<std::string>(), j.at("response").get<std::string>(),
                                  j.value("timestamp", std::string{})});
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError,
                        path.string() + ":" + std::to_string(lineno) + ": bad transcript record: " + e.what());
        }
    }
    return out;
}

void Transcript::set_embedding_info(std::string family, std::size_t dimension) {
    std::lock_guard lock(mutex_);
    if (info_) return;
    info_.emplace(std::move(family), dimension);
    if (sink_) append_line(*sink_, json{{"meta", {{"family", info_->first}, {"dimension", info_->second}}}});
}

std::optional<std::pair<std::string, std::size_t>> Transcript::embedding_info() const {
    std::lock_guard lock(mutex_);
    return info_;
}

void Transcript::append(TranscriptRecord record) {
    std::lock_guard lock(mutex_);
    if (sink_) append_line(*sink_, to_json(record));
    records_.push_back(std::move(record));
}

std::vector<TranscriptRecord> Transcript::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::optional<TranscriptRecord> Transcript::find(std::string_view hash, std::string_view tier,
                                                 std::size_t occurrence) const {
    std::lock_guard lock(mutex_);
    for (const auto& r : records_) {
        if (r.hash != hash || r.tier != tier) continue;
        if (occurrence == 0) return r;
        --occurrence;
    }
    return std::nullopt;
}

void Transcript::save(const std::filesystem::path& path) const {
    std::lock_guard lock(mutex_);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write transcript " + path.string());
    if (info_) out << json{{"meta", {{"family", info_->first}, {"dimension", info_->second}}}}.dump() << '\n';
    for (const auto& r : records_) out << to_json(r).dump() << '\n';
}

} // namespace codegraph::enrich
