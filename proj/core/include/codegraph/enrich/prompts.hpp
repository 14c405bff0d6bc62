#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace codegraph::enrich {

struct PromptTemplate {
    std::string name;
    std::string text;

    std::string hash() const;
};

// Replaces every {{key}} with vars[key]; unknown placeholders are left as is.
std::string render(std::string_view text, const std::map<std::string, std::string>& vars);

// Named templates: describe_code, describe_project, describe_system,
// extract_entities, extract_entities_repair, agent, agent_final. Defaults are compiled in from
// core/prompts/*.txt; a directory may override any of them.
class PromptLibrary {
public:
    static PromptLibrary defaults();
    static PromptLibrary from_directory(const std::filesystem::path& dir);

    const PromptTemplate& get(std::string_view name) const;
    const std::map<std::string, PromptTemplate, std::less<>>& all() const noexcept { return templates_; }

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

} // namespace codegraph::enrich
