#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chermnykh {

/// Failure categories raised by the library. Each maps to a typed failure
/// named in the operation contracts; callers switch on code() rather than
/// parsing messages.
enum class ErrorCode {
  ParameterOutOfRange,
  NonPositiveInput,
  NegativeFactor,
  SingularityAtPrimary,
  Singularity,
  NegativeRadicand,
  DegenerateTriangular,
  NoConvergence,
  ConvergedToPrimary,
  RootNotBracketed,
  NoSignChange,
  NotStable,
  DegenerateFrequencies,
  GaugeUnreachable,
  KreinSignature,
  SingularityEncountered,
  StepUnderflow,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chermnykh
