#pragma once

#include <codegraph/extract/adapter.hpp>
#include <codegraph/extract/types.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace codegraph::extract {

inline constexpr std::uintmax_t kDefaultMaxFileBytes = 1u << 20;

// '*' and '?' stay within a path segment; "**" spans any number of segments.
bool glob_match(std::string_view pattern, std::string_view path);

struct ScanResult {
    std::vector<std::string> files; // repo-relative, lexicographic
    std::vector<Diagnostic> diagnostics;
};

// Throws IoFailure (missing/unreadable root) and NoAdapter.
ScanResult scan_repository(const RepoSpec& spec, std::uintmax_t max_file_bytes = kDefaultMaxFileBytes);
ScanResult scan_repository(const RepoSpec& spec, const LanguageAdapter& adapter,
                           std::uintmax_t max_file_bytes = kDefaultMaxFileBytes);

} // namespace codegraph::extract
