#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace guided {

enum class ErrorCode {
  kMalformedDocument,
  kSchemaViolation,
  kPatternError,
  kHoleError,
  kDegenerateError,
  kProviderTimeout,
  kProviderRefusal,
  kProviderError,
  kMissingCapability,
  kParseError,
  kZeroAreaBox,
  kEmptyMask,
  kMissingSlot,
  kDimensionMismatch,
  kUnknownAsset,
  kEmptyQuery,
  kUnknownSession,
  kEndOfPlan,
  kAtFirstStep,
  kRelayUnavailable,
  kProtocolError,
  kBundleFormat,
  kConfigError,
  kCancelled,
  kIoError,
  kInvalidArgument,
};

// Stable wire name, e.g. "HoleError". Used in protocol error messages.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace guided
