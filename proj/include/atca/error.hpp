#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace atca {

enum class ErrorCode {
  kTooFewPoints,
  kNonMonotoneTime,
  kClickNotStroke,
  kInvalidPoint,
  kInvalidFactor,
  kEmptyMatrix,
  kDimensionMismatch,
  kSingleClass,
  kNonFinite,
  kConvergenceFailure,
  kInsufficientData,
  kBadBinCounts,
  kNoOtherUsers,
  kEmptyPositives,
  kMissingCell,
  kUnknownSetting,
  kTooFewStrokes,
  kEmptyScores,
  kIncompleteMatrix,
  kParseError,
  kSchemaVersionMismatch,
  kInvalidConfig,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace atca
