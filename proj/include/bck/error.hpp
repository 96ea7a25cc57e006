#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bck {

enum class ErrorKind {
    OutOfDomain,
    ParseError,
    ValidationError,
    StepSizeUnderflow,
    InvalidIC,
    DegenerateSolutions,
    GammaVanishes,
    OmegaNotPositive,
    GridTooNarrow,
    DegreeTooLarge,
    NotUnderdamped,
    UnsupportedForceShape,
    InsufficientSlices,
    SolverBreakdown,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorKind::InvalidIC: return "InvalidIC";
        case ErrorKind::DegenerateSolutions: return "DegenerateSolutions";
        case ErrorKind::GammaVanishes: return "GammaVanishes";
        case ErrorKind::OmegaNotPositive: return "OmegaNotPositive";
        case ErrorKind::GridTooNarrow: return "GridTooNarrow";
        case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
        case ErrorKind::NotUnderdamped: return "NotUnderdamped";
        case ErrorKind::UnsupportedForceShape: return "UnsupportedForceShape";
        case ErrorKind::InsufficientSlices: return "InsufficientSlices";
        case ErrorKind::SolverBreakdown: return "SolverBreakdown";
    }
    return "Unknown";
}

/// Single exception type for the library; `kind()` discriminates.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace bck
