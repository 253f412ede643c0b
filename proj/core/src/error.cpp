#include "thermoface/error.hpp"

namespace thermoface {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::WriteFailure: return "WriteFailure";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::DegenerateRadius: return "DegenerateRadius";
    case ErrorCode::NonZeroSumMask: return "NonZeroSumMask";
    case ErrorCode::WrongCount: return "WrongCount";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::SizesMismatch: return "SizesMismatch";
    case ErrorCode::StratificationImpossible: return "StratificationImpossible";
    case ErrorCode::EmptyClassInTraining: return "EmptyClassInTraining";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

bool is_numerical_failure(ErrorCode code) {
  return code == ErrorCode::NonFiniteLoss || code == ErrorCode::DegenerateRadius;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace thermoface
