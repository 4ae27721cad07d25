#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wolbachia {

enum class ErrorCode {
    NotBistable,
    RootBracketingFailed,
    DomainError,
    SingularDenominator,
    DivergentIntegral,
    GridTooCoarse,
    EmptyFeasibleSet,
    InvalidBox,
    RecursionDepthExceeded,
    UnstableStep,
    ConfigInvalid,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotBistable: return "NotBistable";
        case ErrorCode::RootBracketingFailed: return "RootBracketingFailed";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::SingularDenominator: return "SingularDenominator";
        case ErrorCode::DivergentIntegral: return "DivergentIntegral";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
        case ErrorCode::InvalidBox: return "InvalidBox";
        case ErrorCode::RecursionDepthExceeded: return "RecursionDepthExceeded";
        case ErrorCode::UnstableStep: return "UnstableStep";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Single exception type for the library; `code()` is machine-readable.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace wolbachia
