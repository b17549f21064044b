#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msmpolicy {

enum class ErrorCode {
  // data
  kNonFinite,
  kArmOutOfRange,
  kEmptyData,
  kRaggedRows,
  kDimensionMismatch,
  kIoError,
  // configuration / contract
  kBadK,
  kBadLambda,
  kBadConfig,
  kBadDepth,
  kNeedTwoFeatures,
  kNotBinary,
  kUnsupportedClassForArms,
  kUnsupportedClass,
  kMissingNuisance,
  kUnorderedInput,
  kBadLaw,
  // numeric
  kDegenerateArm,
  kPropensityOutOfRange,
  kInfeasible,
  kRootBracketFailure,
};

/// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorCategory { kConfig = 1, kData = 2, kNumeric = 3 };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace msmpolicy
