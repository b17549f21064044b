#pragma once

#include <cmath>
#include <string>

#include "msmpolicy/error.hpp"

namespace msmpolicy {

/// Odds-ratio bound of the marginal sensitivity model, lambda >= 1.
class SensitivityParam {
 public:
  explicit SensitivityParam(double lambda) : lambda_(lambda) {
    if (!std::isfinite(lambda) || lambda < 1.0) {
      throw Error(ErrorCode::kBadLambda, "lambda must be finite and >= 1, got " + std::to_string(lambda));
    }
  }

  static SensitivityParam from_log(double log_lambda) { return SensitivityParam(std::exp(log_lambda)); }

  double value() const noexcept { return lambda_; }
  double log_value() const noexcept { return std::log(lambda_); }

  /// 1/(1+lambda): level of the quantile used by the lower bounds.
  double lower_level() const noexcept { return 1.0 / (1.0 + lambda_); }
  /// lambda/(1+lambda): level of the quantile used by the upper bounds.
  double upper_level() const noexcept { return lambda_ / (1.0 + lambda_); }

  bool is_unconfounded() const noexcept { return lambda_ == 1.0; }

 private:
  double lambda_;
};

}  // namespace msmpolicy
