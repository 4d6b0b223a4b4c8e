#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twotime {

// Every failure the engine reports carries one of these codes. The CLI
// prints the code name verbatim in its error object.
enum class ErrorCode {
  DimensionMismatch,
  DegenerateSpan,
  ImpossibleOutcome,
  UnknownOutcomeLabel,
  ImpossiblePostSelection,
  OrthogonalPrePost,
  DegeneratePostObservable,
  NonCommutingObservables,
  NoAcceptedTrials,
  InvalidDirection,
  ValidationError,
  ParseError,
  InternalError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twotime
