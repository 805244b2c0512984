#include "thincount/error.hpp"

namespace thincount {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveMean: return "NonPositiveMean";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::TotalMismatch: return "TotalMismatch";
    case ErrorCode::InvalidProbabilityVector: return "InvalidProbabilityVector";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::EmptyPopulation: return "EmptyPopulation";
    case ErrorCode::SampleExceedsPopulation: return "SampleExceedsPopulation";
    case ErrorCode::DegreeExceeded: return "DegreeExceeded";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::InfeasibleStart: return "InfeasibleStart";
    case ErrorCode::SpecValidation: return "SpecValidation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, std::string const& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

void raise(ErrorCode code, std::string const& message)
{
    throw Error(code, message);
}

}  // namespace thincount
