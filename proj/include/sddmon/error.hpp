#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sddmon {

enum class ErrorCode {
  kEmptySample,
  kNonFiniteValue,
  kDegenerateSample,
  kInsufficientSamples,
  kDimensionMismatch,
  kUnsupportedKind,
  kInvalidAlpha,
  kInvalidArgument,
  kSizeExceedsData,
  kDegenerateData,
  kInsufficientLabelled,
  kDegeneratePoints,
  kNonConvergence,
  kParseError,
  kVersionMismatch,
  kIdMismatch,
  kIoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnsupportedKind: return "UnsupportedKind";
    case ErrorCode::kInvalidAlpha: return "InvalidAlpha";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSizeExceedsData: return "SizeExceedsData";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kInsufficientLabelled: return "InsufficientLabelled";
    case ErrorCode::kDegeneratePoints: return "DegeneratePoints";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kIdMismatch: return "IdMismatch";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sddmon
