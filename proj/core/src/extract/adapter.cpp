#include <codegraph/extract/adapter.hpp>

#include <codegraph/util/text.hpp>

namespace codegraph::extract {

std::unique_ptr<LanguageAdapter> make_adapter(std::string_view key) {
    if (key == "java") return make_java_adapter();
    if (key == "python") return make_python_adapter();
    if (key == "facts") return make_facts_adapter();
    throw Error(ErrorCode::NoAdapter, "no language adapter named '" + std::string(key) + "'");
}

std::set<std::string> adapter_keys() {
    return {"facts", "java", "python"};
}

ParseResult parse_file(const LanguageAdapter& adapter, std::string_view relative_path,
                       std::string_view bytes, const ParseOptions& options) {
    std::string text(bytes);
    const bool repaired = util::sanitize_utf8(text);
    ParseResult result;
    try {
        result = adapter.parse(relative_path, text, options);
    } catch (const std::exception& e) {
        result = ParseResult{};
        result.diagnostics.push_back({std::string(relative_path), 0,
                                      std::string("adapter failure: ") + e.what()});
    }
    if (repaired) {
        result.diagnostics.insert(result.diagnostics.begin(),
                                  Diagnostic{std::string(relative_path), 0,
                                             "invalid UTF-8 replaced with U+FFFD"});
    }
    return result;
}

} // namespace codegraph::extract
