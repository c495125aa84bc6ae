#include "qvkit/error.hpp"

namespace qvkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveStake: return "NonPositiveStake";
    case ErrorCode::DuplicateVoter: return "DuplicateVoter";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidBallot: return "InvalidBallot";
    case ErrorCode::UnknownVoter: return "UnknownVoter";
    case ErrorCode::GammaOutOfRange: return "GammaOutOfRange";
    case ErrorCode::NonPositiveCount: return "NonPositiveCount";
    case ErrorCode::Unsorted: return "Unsorted";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::TargetBelowFloor: return "TargetBelowFloor";
    case ErrorCode::TargetAboveCurrent: return "TargetAboveCurrent";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::AlignedExceedsTotal: return "AlignedExceedsTotal";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::InfeasibleSolution: return "InfeasibleSolution";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string subject,
             std::optional<std::size_t> line)
    : std::runtime_error(message),
      code_(code),
      subject_(std::move(subject)),
      line_(line) {}

}  // namespace qvkit
