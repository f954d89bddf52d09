#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hilfer {

enum class ErrorCode {
    InvalidArgument,
    OutOfDomain,
    SingularProblem,
    MeshMismatch,
    InsufficientNodes,
    RhsNegative,
    RhsEvaluationFailure,
    InvalidInterval,
    MissingBounds,
    NotConstantRhs,
    RequiresLambdaZero,
    ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::SingularProblem: return "SingularProblem";
        case ErrorCode::MeshMismatch: return "MeshMismatch";
        case ErrorCode::InsufficientNodes: return "InsufficientNodes";
        case ErrorCode::RhsNegative: return "RhsNegative";
        case ErrorCode::RhsEvaluationFailure: return "RhsEvaluationFailure";
        case ErrorCode::InvalidInterval: return "InvalidInterval";
        case ErrorCode::MissingBounds: return "MissingBounds";
        case ErrorCode::NotConstantRhs: return "NotConstantRhs";
        case ErrorCode::RequiresLambdaZero: return "RequiresLambdaZero";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/**
 * Error: every failure raised by the library carries a machine-readable code
 * so that front ends can map outcomes to exit statuses without string matching.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

}  // namespace hilfer
