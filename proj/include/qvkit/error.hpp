#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qvkit {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveStake,
  DuplicateVoter,
  InvalidSpec,
  LengthMismatch,
  InvalidBallot,
  UnknownVoter,
  GammaOutOfRange,
  NonPositiveCount,
  Unsorted,
  AllZero,
  ThresholdOutOfRange,
  KOutOfRange,
  TargetBelowFloor,
  TargetAboveCurrent,
  NoConvergence,
  AlignedExceedsTotal,
  DegenerateDenominator,
  DimensionTooLarge,
  InfeasibleSolution,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for all domain failures. `subject` names the offending
// entity (voter id, index, flag) and `line` carries file context when the
// failure came from parsing input.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {},
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string subject_;
  std::optional<std::size_t> line_;
};

}  // namespace qvkit
