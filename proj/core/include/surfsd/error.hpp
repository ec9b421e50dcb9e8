#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace surfsd {

enum class ErrorCode {
    NoConvergence,
    OutsideBand,
    BoxTooSmall,
    EmptySurface,
    DegenerateInput,
    NotWatertight,
    NotTangential,
    SingularSystem,
    DegenerateLevels,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Numerical or geometric failure raised by the core library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::OutsideBand: return "OutsideBand";
        case ErrorCode::BoxTooSmall: return "BoxTooSmall";
        case ErrorCode::EmptySurface: return "EmptySurface";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::NotWatertight: return "NotWatertight";
        case ErrorCode::NotTangential: return "NotTangential";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::DegenerateLevels: return "DegenerateLevels";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace surfsd
