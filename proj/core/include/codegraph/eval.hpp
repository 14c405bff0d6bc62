#pragma once

#include <codegraph/agent/agent.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace codegraph::eval {

enum class Category { Factual, MultiSource, Predictive };
enum class Level { High, Medium, Low };
enum class Metric { Accuracy, Completeness, Coherence };

std::string_view to_string(Category c) noexcept;
std::string_view to_string(Level l) noexcept;
std::string_view to_string(Metric m) noexcept;
std::optional<Category> parse_category(std::string_view text) noexcept;
std::optional<Level> parse_level(std::string_view text) noexcept;

inline constexpr std::array<Metric, 3> kMetrics{Metric::Accuracy, Metric::Completeness, Metric::Coherence};
inline constexpr std::array<Category, 3> kCategories{Category::Factual, Category::MultiSource, Category::Predictive};

struct EvalQuestion {
    std::string id;
    Category category = Category::Factual;
    std::string text;
};

struct AnswerRecord {
    std::string id;
    Category category = Category::Factual;
    std::string question;
    std::string answer;
    std::string status; // "ok" or "failed"
    bool forced = false;
    std::string error;
    std::string trace; // path relative to the answers file
    std::size_t steps = 0;

    friend bool operator==(const AnswerRecord&, const AnswerRecord&) = default;
};

struct Rating {
    std::string question_id;
    std::string annotator;
    std::map<Metric, Level> levels;
};

// Line-delimited JSON readers. Throw IoFailure, ParseError (bad fields,
// duplicate ids or duplicate (questionId, annotator) pairs).
std::vector<EvalQuestion> parse_questions(std::string_view jsonl);
std::vector<EvalQuestion> load_questions(const std::filesystem::path& path);
std::vector<AnswerRecord> parse_answers(std::string_view jsonl);
std::vector<AnswerRecord> load_answers(const std::filesystem::path& path);
std::vector<Rating> parse_ratings(std::string_view jsonl);
std::vector<Rating> load_ratings(const std::filesystem::path& path);

nlohmann::json to_json(const AnswerRecord& a);

// One fresh agent run per question. Writes <out>/answers.jsonl and
// <out>/traces/<id>.jsonl; a failing question is recorded and the run
// continues. Answers are in question order regardless of parallelism.
std::vector<AnswerRecord> run_eval(const std::vector<EvalQuestion>& questions, const agent::ReactAgent& agent,
                                   const std::filesystem::path& out_dir, std::size_t parallelism = 1);

struct LevelCounts {
    std::array<std::size_t, 3> counts{}; // high, medium, low
    std::size_t total() const noexcept { return counts[0] + counts[1] + counts[2]; }
    // Percentages rounded half-up to one decimal.
    std::array<double, 3> percentages() const;
};

struct EvalReport {
    std::size_t rated = 0;
    std::map<Metric, LevelCounts> overall;
    std::map<Category, std::map<Metric, LevelCounts>> by_category;
    std::vector<std::string> warnings;
};

// Throws NoRatings, UnknownQuestionId. Answers without a rating produce an
// UnratedAnswer warning.
EvalReport build_report(const std::vector<Rating>& ratings, const std::vector<AnswerRecord>& answers);

std::string report_text(const EvalReport& report, bool by_category = false);
nlohmann::json report_json(const EvalReport& report);

} // namespace codegraph::eval
