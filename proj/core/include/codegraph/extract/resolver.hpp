#pragma once

#include <codegraph/extract/types.hpp>

#include <map>
#include <string>
#include <vector>

namespace codegraph::extract {

struct ResolutionReport {
    std::size_t resolved = 0;
    std::size_t unresolved = 0;
    std::size_t ambiguous = 0;
    std::vector<Diagnostic> diagnostics;
};

struct Resolution {
    std::vector<RawRelation> relations; // resolved only, `resolved` set
    ResolutionReport report;
    // Outcome per input relation, aligned with the input order.
    std::vector<int> outcome; // 0 resolved, 1 unresolved, 2 ambiguous
};

// Resolves each target reference across the whole system by, in order:
// exact qualified match, import-context expansion, unique simple name.
// Self references are discarded and counted as unresolved.
Resolution resolve_references(const std::vector<CodeUnit>& units,
                              const std::vector<RawRelation>& relations,
                              const std::map<std::string, ImportContext>& contexts);

} // namespace codegraph::extract
