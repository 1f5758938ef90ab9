#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqcp {

enum class ErrorCode {
  InvalidLength,
  DimError,
  InvalidResponse,
  InvalidPenalty,
  EmptySegment,
  SolverDiverged,
  StateDiverged,
  InvalidCovariance,
  LengthMismatch,
  InvalidScenario,
  ParseError,
  InternalError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for failures of the numerical machinery rather than of the input.
  bool numerical() const noexcept {
    return code_ == ErrorCode::SolverDiverged ||
           code_ == ErrorCode::StateDiverged ||
           code_ == ErrorCode::InternalError;
  }

 private:
  ErrorCode code_;
};

}  // namespace seqcp
