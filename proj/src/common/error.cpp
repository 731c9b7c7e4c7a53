#include "guided/error.hpp"

namespace guided {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kPatternError: return "PatternError";
    case ErrorCode::kHoleError: return "HoleError";
    case ErrorCode::kDegenerateError: return "DegenerateError";
    case ErrorCode::kProviderTimeout: return "ProviderTimeout";
    case ErrorCode::kProviderRefusal: return "ProviderRefusal";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kMissingCapability: return "MissingCapability";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kZeroAreaBox: return "ZeroAreaBox";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kMissingSlot: return "MissingSlot";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnknownAsset: return "UnknownAsset";
    case ErrorCode::kEmptyQuery: return "EmptyQuery";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kEndOfPlan: return "EndOfPlan";
    case ErrorCode::kAtFirstStep: return "AtFirstStep";
    case ErrorCode::kRelayUnavailable: return "RelayUnavailable";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kBundleFormat: return "BundleFormatError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kCancelled: return "Cancelled";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace guided
