#include <codegraph/error.hpp>

namespace codegraph {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
    case ErrorCode::NoAdapter: return "NoAdapter";
    case ErrorCode::DuplicateProjectName: return "DuplicateProjectName";
    case ErrorCode::ProviderFailure: return "ProviderFailure";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::MalformedExtraction: return "MalformedExtraction";
    case ErrorCode::MalformedAction: return "MalformedAction";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::NoEntities: return "NoEntities";
    case ErrorCode::NotACodeNode: return "NotACodeNode";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::BuildError: return "BuildError";
    case ErrorCode::NoRatings: return "NoRatings";
    case ErrorCode::UnknownQuestionId: return "UnknownQuestionId";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace codegraph
