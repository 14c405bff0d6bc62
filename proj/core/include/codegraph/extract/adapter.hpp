#pragma once

#include <codegraph/extract/types.hpp>

#include <memory>
#include <set>
#include <string>
#include <string_view>

namespace codegraph::extract {

// Turns one source file into code units and unresolved relations.
// Implementations are deterministic and never throw on malformed input;
// problems come back as diagnostics.
class LanguageAdapter {
public:
    virtual ~LanguageAdapter() = default;

    virtual std::string key() const = 0;
    // Repo-relative path filter (extension match for source adapters).
    virtual bool accepts(std::string_view relative_path) const = 0;
    virtual ParseResult parse(std::string_view relative_path, std::string_view bytes,
                              const ParseOptions& options) const = 0;
};

// Throws Error(NoAdapter) for unknown keys.
std::unique_ptr<LanguageAdapter> make_adapter(std::string_view key);
std::set<std::string> adapter_keys();

std::unique_ptr<LanguageAdapter> make_java_adapter();
std::unique_ptr<LanguageAdapter> make_python_adapter();
std::unique_ptr<LanguageAdapter> make_facts_adapter();

// Decodes bytes (lossy UTF-8 repair noted as a diagnostic) and runs the
// adapter, turning any internal failure into a diagnostic.
ParseResult parse_file(const LanguageAdapter& adapter, std::string_view relative_path,
                       std::string_view bytes, const ParseOptions& options = {});

} // namespace codegraph::extract
