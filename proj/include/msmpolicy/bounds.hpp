#pragma once

#include <vector>

#include "msmpolicy/sensitivity.hpp"

namespace msmpolicy {

/// Lower bounds use the level-1/(1+lambda) quantile and exponent -sgn;
/// upper bounds use the level-lambda/(1+lambda) quantile and exponent +sgn.
enum class BoundSide { kLower, kUpper };
enum class Direction { kMin, kMax };

/// Test hook: kFlipped swaps the sign of the lambda exponent. Used to check
/// that the self-check suites catch a wrong convention.
enum class SignConvention { kStandard, kFlipped };

/// sgn(t) = 1 for t >= 0, -1 otherwise.
inline int sgn(double t) noexcept { return t >= 0.0 ? 1 : -1; }

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
};

/// y 1{a_obs = arm} [1 + ((1-e)/e) lambda^{+-sgn(y - q)}].
/// Throws PropensityOutOfRange unless 0 < e < 1.
double mu_bound_pointwise(double y, int a_obs, int arm, double e, double q, const SensitivityParam& lambda,
                          BoundSide side, SignConvention convention = SignConvention::kStandard);

/// Bound on E[Y(a) | x] from propensity and truncated means around the
/// matching quantile, assuming no atom at the quantile:
///   lower  e m + (1-e)(lambda rho_below + rho_above / lambda)
///   upper  e m + (1-e)(rho_below / lambda + lambda rho_above)
/// with m = rho_below + rho_above.
double mu_bound_from_nuisance(double e, double rho_below, double rho_above, const SensitivityParam& lambda,
                              BoundSide side);

struct Atom {
  double y = 0.0;
  double p = 0.0;
};

/// Law of Y given X = x, A = a with finite support. Atoms are sorted and
/// duplicate outcomes merged on construction.
class FiniteConditionalLaw {
 public:
  /// Throws BadLaw on empty support, non-positive or non-finite masses, or
  /// masses not summing to 1 within 1e-12; PropensityOutOfRange unless 0 < e < 1.
  FiniteConditionalLaw(int arm, double e, std::vector<Atom> atoms);

  int arm() const noexcept { return arm_; }
  double e() const noexcept { return e_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  double mean() const;
  /// inf{q : F(q) >= level}.
  double quantile(double level) const;
  double cdf(double c) const;
  /// E[Y 1{Y < c}] and E[Y 1{Y > c}].
  double mean_below(double c) const;
  double mean_above(double c) const;

 private:
  int arm_;
  double e_;
  std::vector<Atom> atoms_;
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> weights;  // aligned with atoms()
};

/// Sharp bound on E[Y(a) | x] by linear programming over inverse-propensity
/// weights w_j in [1 + r/lambda, 1 + r lambda], r = (1-e)/e, subject to
/// sum_j p_j w_j = 1/e. Solved exactly as a fractional knapsack: the extreme
/// weight goes to the largest (max) or smallest (min) outcomes with one
/// fractional pivot. Returns e sum_j p_j y_j w_j and the weights.
LpSolution sharp_bound_finite(const FiniteConditionalLaw& law, const SensitivityParam& lambda, Direction direction);

/// Expectation of mu_bound_pointwise under the law, at the law's own quantile.
double closed_form_bound(const FiniteConditionalLaw& law, const SensitivityParam& lambda, BoundSide side,
                         SignConvention convention = SignConvention::kStandard);

/// (mu1.lower - mu0.upper, mu1.upper - mu0.lower). Throws UnorderedInput when
/// either pair has lower > upper + 1e-12.
BoundPair tau_bounds(const BoundPair& mu1, const BoundPair& mu0);

/// 1 iff mu_lower_1 > mu_lower_0.
int first_best_mmw(double mu_lower_1, double mu_lower_0);
/// 1 iff tau_lower > 0.
int first_best_mmi(double tau_lower);
/// Treat if tau_lower > 0, withhold if tau_upper < 0, otherwise treat iff
/// tau_lower + tau_upper > 0. Throws UnorderedInput when tau_lower > tau_upper.
int pz_rule(double tau_lower, double tau_upper);

}  // namespace msmpolicy
