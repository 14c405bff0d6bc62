#include <codegraph/extract/adapter.hpp>

#include <codegraph/util/text.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

// Declarative adapter: a repository carries a facts.json listing its units
// and relations explicitly. Unit sources are sliced from the referenced
// files when they exist.

namespace codegraph::extract {

namespace {

using json = nlohmann::json;

std::string read_source(const std::filesystem::path& root, const std::string& file, Span span) {
    if (root.empty()) return {};
    std::ifstream in(root / file, std::ios::binary);
    if (!in) return {};
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    util::sanitize_utf8(text);
    return util::slice_lines(text, span.start_line, span.end_line);
}

class FactsAdapter final : public LanguageAdapter {
public:
    std::string key() const override { return "facts"; }

    bool accepts(std::string_view relative_path) const override { return relative_path == "facts.json"; }

    ParseResult parse(std::string_view relative_path, std::string_view bytes,
                      const ParseOptions& options) const override {
        ParseResult result;
        const std::string path(relative_path);
        auto diag = [&](std::string message) { result.diagnostics.push_back({path, 0, std::move(message)}); };
        if (util::trim(bytes).empty()) return result;

        json doc;
        try {
            doc = json::parse(bytes);
        } catch (const json::exception& e) {
            diag(std::string("invalid facts JSON: ") + e.what());
            return result;
        }
        if (!doc.is_object()) {
            diag("facts document must be a JSON object");
            return result;
        }

        std::set<std::string> uids;
        if (doc.contains("units") && doc["units"].is_array()) {
            for (const auto& u : doc["units"]) {
                try {
                    CodeUnit unit;
                    unit.uid = u.at("uid").get<std::string>();
                    const auto kind = parse_unit_kind(u.at("kind").get<std::string>());
                    if (!kind) {
                        diag("unit " + unit.uid + " has unknown kind");
                        continue;
                    }
                    unit.kind = *kind;
                    unit.name = u.at("name").get<std::string>();
                    unit.file = u.at("file").get<std::string>();
                    const auto& span = u.at("span");
                    unit.span = Span{span.at(0).get<int>(), span.at(1).get<int>()};
                    if (unit.uid.empty() || unit.file.empty() || unit.span.start_line < 1 ||
                        unit.span.end_line < unit.span.start_line) {
                        diag("unit " + unit.uid + " has an invalid uid, file or span");
                        continue;
                    }
                    if (!uids.insert(unit.uid).second) {
                        diag("duplicate unit " + unit.uid);
                        continue;
                    }
                    if (u.contains("methods") && u["methods"].is_array()) {
                        for (const auto& m : u["methods"]) unit.methods.push_back(m.get<std::string>());
                    }
                    unit.source = read_source(options.repo_root, unit.file, unit.span);
                    result.units.push_back(std::move(unit));
                } catch (const json::exception& e) {
                    diag(std::string("malformed unit record: ") + e.what());
                }
            }
        }
        if (doc.contains("relations") && doc["relations"].is_array()) {
            for (const auto& r : doc["relations"]) {
                try {
                    RawRelation rel;
                    rel.src_uid = r.at("src").get<std::string>();
                    const auto kind = parse_relation_kind(r.at("kind").get<std::string>());
                    rel.target_ref = r.at("target").get<std::string>();
                    rel.context = path;
                    if (!kind) {
                        diag("relation from " + rel.src_uid + " has unknown kind");
                        continue;
                    }
                    if (!uids.count(rel.src_uid)) {
                        diag("relation source " + rel.src_uid + " is not a declared unit");
                        continue;
                    }
                    rel.kind = *kind;
                    result.relations.push_back(std::move(rel));
                } catch (const json::exception& e) {
                    diag(std::string("malformed relation record: ") + e.what());
                }
            }
        }
        result.contexts[path] = ImportContext{};
        return result;
    }
};

} // namespace

std::unique_ptr<LanguageAdapter> make_facts_adapter() {
    return std::make_unique<FactsAdapter>();
}

} // namespace codegraph::extract
