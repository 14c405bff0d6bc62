#include <codegraph/eval.hpp>

#include <codegraph/util/parallel.hpp>
#include <codegraph/util/text.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace codegraph::eval {

using json = nlohmann::json;

std::string_view to_string(Category c) noexcept {
    switch (c) {
    case Category::Factual: return "factual";
    case Category::MultiSource: return "multi_source";
    case Category::Predictive: return "predictive";
    }
    return "factual";
}

std::string_view to_string(Level l) noexcept {
    switch (l) {
    case Level::High: return "high";
    case Level::Medium: return "medium";
    case Level::Low: return "low";
    }
    return "low";
}

std::string_view to_string(Metric m) noexcept {
    switch (m) {
    case Metric::Accuracy: return "accuracy";
    case Metric::Completeness: return "completeness";
    case Metric::Coherence: return "coherence";
    }
    return "accuracy";
}

std::optional<Category> parse_category(std::string_view text) noexcept {
    for (auto c : kCategories) {
        if (to_string(c) == text) return c;
    }
    return std::nullopt;
}

std::optional<Level> parse_level(std::string_view text) noexcept {
    const auto lower = util::to_lower(text);
    for (auto l : {Level::High, Level::Medium, Level::Low}) {
        if (to_string(l) == lower) return l;
    }
    return std::nullopt;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename Fn>
void each_record(std::string_view jsonl, std::string_view what, Fn&& fn) {
    std::size_t lineno = 0;
    for (auto line : util::split_lines(jsonl)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        const auto where = std::string(what) + " line " + std::to_string(lineno);
        try {
            fn(json::parse(line), where);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, where + ": " + e.what());
        }
    }
}

std::string rating_key(const Rating& r) {
    return r.question_id + "\n" + r.annotator;
}

} // namespace

std::vector<EvalQuestion> parse_questions(std::string_view jsonl) {
    std::vector<EvalQuestion> out;
    std::set<std::string> ids;
    each_record(jsonl, "questions", [&](const json& j, const std::string& where) {
        EvalQuestion q;
        q.id = j.at("id").get<std::string>();
        const auto cat = parse_category(j.at("category").get<std::string>());
        if (!cat) throw Error(ErrorCode::ParseError, where + ": unknown category " + j["category"].dump());
        q.category = *cat;
        q.text = j.at("text").get<std::string>();
        if (q.id.empty() || util::trim(q.text).empty()) throw Error(ErrorCode::ParseError, where + ": empty id or text");
        if (!ids.insert(q.id).second) throw Error(ErrorCode::ParseError, where + ": duplicate id " + q.id);
        out.push_back(std::move(q));
    });
    return out;
}

std::vector<EvalQuestion> load_questions(const std::filesystem::path& path) {
    return parse_questions(read_file(path));
}

json to_json(const AnswerRecord& a) {
    return json{{"id", a.id},         {"category", to_string(a.category)},
                {"question", a.question}, {"answer", a.answer},
                {"status", a.status}, {"forced", a.forced},
                {"error", a.error},   {"trace", a.trace},
                {"steps", a.steps}};
}

std::vector<AnswerRecord> parse_answers(std::string_view jsonl) {
    std::vector<AnswerRecord> out;
    each_record(jsonl, "answers", [&](const json& j, const std::string& where) {
        AnswerRecord a;
        a.id = j.at("id").get<std::string>();
        const auto cat = parse_category(j.at("category").get<std::string>());
        if (!cat) throw Error(ErrorCode::ParseError, where + ": unknown category");
        a.category = *cat;
        a.question = j.at("question").get<std::string>();
        a.answer = j.at("answer").get<std::string>();
        a.status = j.at("status").get<std::string>();
        a.forced = j.value("forced", false);
        a.error = j.value("error", std::string{});
        a.trace = j.value("trace", std::string{});
        a.steps = j.value("steps", std::size_t{0});
        out.push_back(std::move(a));
    });
    return out;
}

std::vector<AnswerRecord> load_answers(const std::filesystem::path& path) {
    return parse_answers(read_file(path));
}

std::vector<Rating> parse_ratings(std::string_view jsonl) {
    std::vector<Rating> out;
    std::set<std::string> seen;
    each_record(jsonl, "ratings", [&](const json& j, const std::string& where) {
        Rating r;
        r.question_id = j.at("questionId").get<std::string>();
        r.annotator = j.value("annotator", std::string{});
        for (auto m : kMetrics) {
            const auto key = std::string(to_string(m));
            const auto level = parse_level(j.at(key).get<std::string>());
            if (!level) throw Error(ErrorCode::ParseError, where + ": bad " + key + " level " + j[key].dump());
            r.levels[m] = *level;
        }
        if (!seen.insert(rating_key(r)).second) {
            throw Error(ErrorCode::ParseError,
                        where + ": duplicate rating for " + r.question_id + " by \"" + r.annotator + "\"");
        }
        out.push_back(std::move(r));
    });
    return out;
}

std::vector<Rating> load_ratings(const std::filesystem::path& path) {
    return parse_ratings(read_file(path));
}

std::vector<AnswerRecord> run_eval(const std::vector<EvalQuestion>& questions, const agent::ReactAgent& agent,
                                   const std::filesystem::path& out_dir, std::size_t parallelism) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "traces", ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + (out_dir / "traces").string() + ": " + ec.message());

    std::vector<AnswerRecord> answers(questions.size());
    util::parallel_for(questions.size(), parallelism, [&](std::size_t i) {
        const auto& q = questions[i];
        auto& a = answers[i];
        a.id = q.id;
        a.category = q.category;
        a.question = q.text;
        a.trace = "traces/" + q.id + ".jsonl";
        agent::AgentTrace trace;
        try {
            trace = agent.run(q.text, q.id);
        } catch (const Error& e) {
            trace.trace_id = q.id;
            trace.question = q.text;
            trace.status = agent::TraceStatus::Error;
            trace.error = std::string(codegraph::to_string(e.code())) + ": " + e.what();
        }
        agent::save_trace(trace, out_dir / a.trace);
        a.answer = trace.final_answer;
        a.steps = trace.steps.size();
        a.forced = trace.forced();
        a.status = trace.status == agent::TraceStatus::Error ? "failed" : "ok";
        a.error = trace.error;
    });

    const auto path = out_dir / "answers.jsonl";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    for (const auto& a : answers) out << to_json(a).dump() << '\n';
    return answers;
}

std::array<double, 3> LevelCounts::percentages() const {
    std::array<double, 3> out{};
    const auto n = total();
    if (n == 0) return out;
    for (std::size_t i = 0; i < 3; ++i) {
        // Integer half-up rounding to tenths avoids binary-fraction surprises.
        const auto tenths = (counts[i] * 2000 + n) / (2 * n);
        out[i] = static_cast<double>(tenths) / 10.0;
    }
    return out;
}

EvalReport build_report(const std::vector<Rating>& ratings, const std::vector<AnswerRecord>& answers) {
    if (ratings.empty()) throw Error(ErrorCode::NoRatings, "no ratings");
    std::map<std::string, const AnswerRecord*> by_id;
    for (const auto& a : answers) by_id[a.id] = &a;

    EvalReport report;
    std::set<std::string> rated_ids;
    for (const auto& r : ratings) {
        auto it = by_id.find(r.question_id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::UnknownQuestionId, "rating for unknown question " + r.question_id);
        }
        rated_ids.insert(r.question_id);
        ++report.rated;
        for (const auto& [metric, level] : r.levels) {
            report.overall[metric].counts[static_cast<std::size_t>(level)]++;
            report.by_category[it->second->category][metric].counts[static_cast<std::size_t>(level)]++;
        }
    }
    for (const auto& a : answers) {
        if (!rated_ids.count(a.id)) report.warnings.push_back("UnratedAnswer: " + a.id);
    }
    return report;
}

namespace {

std::string title(std::string_view s) {
    std::string out(s);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

void table(std::string& out, const std::map<Metric, LevelCounts>& rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-14s %9s %11s %8s\n", "Metric", "High (%)", "Medium (%)", "Low (%)");
    out += buf;
    for (auto m : kMetrics) {
        auto it = rows.find(m);
        const auto p = it == rows.end() ? std::array<double, 3>{} : it->second.percentages();
        std::snprintf(buf, sizeof buf, "%-14s %9.1f %11.1f %8.1f\n", title(to_string(m)).c_str(), p[0], p[1], p[2]);
        out += buf;
    }
}

json rows_json(const std::map<Metric, LevelCounts>& rows) {
    json j = json::object();
    for (auto m : kMetrics) {
        auto it = rows.find(m);
        const LevelCounts c = it == rows.end() ? LevelCounts{} : it->second;
        const auto p = c.percentages();
        j[std::string(to_string(m))] = {{"high", p[0]},
                                        {"medium", p[1]},
                                        {"low", p[2]},
                                        {"counts", {{"high", c.counts[0]}, {"medium", c.counts[1]}, {"low", c.counts[2]}}}};
    }
    return j;
}

} // namespace

std::string report_text(const EvalReport& report, bool by_category) {
    std::string out = "Rated responses: " + std::to_string(report.rated) + "\n";
    table(out, report.overall);
    if (by_category) {
        for (auto c : kCategories) {
            auto it = report.by_category.find(c);
            if (it == report.by_category.end()) continue;
            out += "\nCategory " + std::string(to_string(c)) + " (" +
                   std::to_string(it->second.begin()->second.total()) + ")\n";
            table(out, it->second);
        }
    }
    for (const auto& w : report.warnings) out += "warning: " + w + "\n";
    return out;
}

json report_json(const EvalReport& report) {
    json j{{"rated", report.rated}, {"metrics", rows_json(report.overall)}, {"warnings", report.warnings}};
    json cats = json::object();
    for (const auto& [c, rows] : report.by_category) cats[std::string(to_string(c))] = rows_json(rows);
    j["categories"] = cats;
    return j;
}

} // namespace codegraph::eval
