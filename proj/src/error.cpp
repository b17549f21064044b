#include "msmpolicy/error.hpp"

namespace msmpolicy {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kArmOutOfRange: return "ArmOutOfRange";
    case ErrorCode::kEmptyData: return "EmptyData";
    case ErrorCode::kRaggedRows: return "RaggedRows";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kBadK: return "BadK";
    case ErrorCode::kBadLambda: return "BadLambda";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kBadDepth: return "BadDepth";
    case ErrorCode::kNeedTwoFeatures: return "NeedTwoFeatures";
    case ErrorCode::kNotBinary: return "NotBinary";
    case ErrorCode::kUnsupportedClassForArms: return "UnsupportedClassForArms";
    case ErrorCode::kUnsupportedClass: return "UnsupportedClass";
    case ErrorCode::kMissingNuisance: return "MissingNuisance";
    case ErrorCode::kUnorderedInput: return "UnorderedInput";
    case ErrorCode::kBadLaw: return "BadLaw";
    case ErrorCode::kDegenerateArm: return "DegenerateArm";
    case ErrorCode::kPropensityOutOfRange: return "PropensityOutOfRange";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kRootBracketFailure: return "RootBracketFailure";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFinite:
    case ErrorCode::kArmOutOfRange:
    case ErrorCode::kEmptyData:
    case ErrorCode::kRaggedRows:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kIoError:
      return ErrorCategory::kData;
    case ErrorCode::kDegenerateArm:
    case ErrorCode::kPropensityOutOfRange:
    case ErrorCode::kInfeasible:
    case ErrorCode::kRootBracketFailure:
      return ErrorCategory::kNumeric;
    default:
      return ErrorCategory::kConfig;
  }
}

}  // namespace msmpolicy
