#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermoface {

enum class ErrorCode {
  UnreadableFile,
  UnsupportedFormat,
  WriteFailure,
  InvalidParameter,
  ParseError,
  InvalidLabel,
  ImageTooSmall,
  DegenerateRadius,
  NonZeroSumMask,
  WrongCount,
  TooFewSamples,
  DimensionMismatch,
  KTooLarge,
  NonFiniteLoss,
  InvalidK,
  SizesMismatch,
  StratificationImpossible,
  EmptyClassInTraining,
  VersionMismatch,
};

std::string_view to_string(ErrorCode code);

// Numerical failures (divergence, degenerate geometry) as opposed to bad input.
bool is_numerical_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace thermoface
