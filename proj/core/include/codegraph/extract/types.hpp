#pragma once

#include <codegraph/graph.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace codegraph::extract {

struct RepoSpec {
    std::string name;
    std::filesystem::path root;
    std::string language; // adapter key: "java", "python", "facts"
    std::vector<std::string> include;
    std::vector<std::string> exclude;
    std::string url;
};

enum class UnitKind { Class, Interface, Function, Struct, Method };

std::string_view to_string(UnitKind kind) noexcept;
std::optional<UnitKind> parse_unit_kind(std::string_view text) noexcept;

struct Span {
    int start_line = 1;
    int end_line = 1;
    friend bool operator==(const Span&, const Span&) = default;
};

struct CodeUnit {
    std::string uid;
    UnitKind kind = UnitKind::Class;
    std::string name;
    std::string file; // repo-relative, '/'-separated
    Span span;
    std::string source;
    std::vector<std::string> methods;
    std::string parent_uid; // enclosing unit for promoted methods

    friend bool operator==(const CodeUnit&, const CodeUnit&) = default;
};

enum class RelationKind { DependsOn, Calls, Implements };

std::string_view label_of(RelationKind kind) noexcept;
std::optional<RelationKind> parse_relation_kind(std::string_view text) noexcept;

struct RawRelation {
    std::string src_uid;
    RelationKind kind = RelationKind::DependsOn;
    std::string target_ref;
    std::optional<std::string> resolved;
    std::string context; // key into the import-context table

    friend bool operator==(const RawRelation&, const RawRelation&) = default;
};

// Per-file naming scope used to expand bare references.
struct ImportContext {
    std::map<std::string, std::string> aliases; // simple name -> qualified uid
    std::vector<std::string> prefixes;          // tried in order as prefix + ref

    friend bool operator==(const ImportContext&, const ImportContext&) = default;
};

struct Diagnostic {
    std::string file;
    int line = 0;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ParseResult {
    std::vector<CodeUnit> units;
    std::vector<RawRelation> relations;
    std::map<std::string, ImportContext> contexts;
    std::vector<Diagnostic> diagnostics;
};

struct ParseOptions {
    bool promote_methods = false;
    std::filesystem::path repo_root; // FACTS reads unit sources relative to this
};

} // namespace codegraph::extract
