#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fenecongest {

enum class ErrorCode {
    DomainOverflow,
    Singular,
    InvalidOrder,
    RejectedMatrix,
    GridMismatch,
    CflViolation,
    NonConvergence,
    VacuumBreakdown,
    NonFinite,
    NegativeInput,
    InvalidArgument,
    ValidationError,
    IoError,
    FormatError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DomainOverflow: return "DomainOverflow";
        case ErrorCode::Singular: return "Singular";
        case ErrorCode::InvalidOrder: return "InvalidOrder";
        case ErrorCode::RejectedMatrix: return "RejectedMatrix";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::CflViolation: return "CflViolation";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::VacuumBreakdown: return "VacuumBreakdown";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NegativeInput: return "NegativeInput";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::FormatError: return "FormatError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorCode values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Config validation failure; keeps every violation, not only the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(ErrorCode::ValidationError, join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = std::to_string(v.size()) + " violation(s)";
        for (const auto& s : v) {
            out += "\n  ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

}  // namespace fenecongest
