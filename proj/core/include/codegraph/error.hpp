#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codegraph {

enum class ErrorCode {
    DuplicateId,
    UnknownEndpoint,
    UnknownId,
    SchemaViolation,
    ParseError,
    IoFailure,
    VersionMismatch,
    CorruptSnapshot,
    NoAdapter,
    DuplicateProjectName,
    ProviderFailure,
    ReplayMiss,
    MalformedExtraction,
    MalformedAction,
    EmptyIndex,
    NoEntities,
    NotACodeNode,
    ConfigError,
    BuildError,
    NoRatings,
    UnknownQuestionId,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures surface as this exception; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace codegraph
