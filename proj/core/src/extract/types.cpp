#include <codegraph/extract/types.hpp>

namespace codegraph::extract {

std::string_view to_string(UnitKind kind) noexcept {
    switch (kind) {
    case UnitKind::Class: return "class";
    case UnitKind::Interface: return "interface";
    case UnitKind::Function: return "function";
    case UnitKind::Struct: return "struct";
    case UnitKind::Method: return "method";
    }
    return "class";
}

std::optional<UnitKind> parse_unit_kind(std::string_view text) noexcept {
    if (text == "class") return UnitKind::Class;
    if (text == "interface") return UnitKind::Interface;
    if (text == "function") return UnitKind::Function;
    if (text == "struct") return UnitKind::Struct;
    if (text == "method") return UnitKind::Method;
    return std::nullopt;
}

std::string_view label_of(RelationKind kind) noexcept {
    switch (kind) {
    case RelationKind::DependsOn: return labels::kDependsOn;
    case RelationKind::Calls: return labels::kCalls;
    case RelationKind::Implements: return labels::kImplements;
    }
    return labels::kDependsOn;
}

std::optional<RelationKind> parse_relation_kind(std::string_view text) noexcept {
    if (text == labels::kDependsOn) return RelationKind::DependsOn;
    if (text == labels::kCalls) return RelationKind::Calls;
    if (text == labels::kImplements) return RelationKind::Implements;
    return std::nullopt;
}

} // namespace codegraph::extract
