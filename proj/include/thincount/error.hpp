#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thincount {

enum class ErrorCode {
    InvalidArgument = 1,
    DimensionMismatch,
    NonPositiveMean,
    InvalidParameter,
    TotalMismatch,
    InvalidProbabilityVector,
    SupportViolation,
    EmptyPopulation,
    SampleExceedsPopulation,
    DegreeExceeded,
    NonConvergence,
    SingularInformation,
    InfeasibleStart,
    SpecValidation,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// C API can translate it without string matching.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, std::string const& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, std::string const& message);

}  // namespace thincount
