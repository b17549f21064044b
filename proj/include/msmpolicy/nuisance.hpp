#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "msmpolicy/dataset.hpp"
#include "msmpolicy/folds.hpp"
#include "msmpolicy/gbt.hpp"
#include "msmpolicy/sensitivity.hpp"

namespace msmpolicy {

/// Closed-form nuisance bundle registered for the `oracle` learner.
///
/// Implementations describe the observed-data law: the nominal propensity
/// and, for each arm, the conditional law of Y given X = x, A = a through its
/// quantile function and truncated first moments.
class NuisanceOracle {
 public:
  virtual ~NuisanceOracle() = default;
  virtual int arms() const = 0;
  virtual std::vector<double> propensity(std::span<const double> x) const = 0;
  /// inf{q : F(q | x, arm) >= level}.
  virtual double quantile(std::span<const double> x, int arm, double level) const = 0;
  /// E[Y 1{Y < c} | x, arm].
  virtual double mean_below(std::span<const double> x, int arm, double c) const = 0;
  /// E[Y 1{Y > c} | x, arm].
  virtual double mean_above(std::span<const double> x, int arm, double c) const = 0;
};

enum class LearnerKind { kGbt, kKnn, kOracle };

struct NuisanceSpec {
  LearnerKind learner = LearnerKind::kGbt;
  GbtParams gbt;
  std::size_t knn_neighbors = 0;  // 0 selects ceil(n^0.6) of the searched set
  double clip_kappa = 0.01;
  SensitivityParam lambda{1.0};
  int folds = 10;
  bool fit_upper = true;  // also fit the level-lambda/(1+lambda) nuisances
  int threads = 1;
  std::shared_ptr<const NuisanceOracle> oracle;

  void validate(int m) const;
};

class ArmProbabilityPredictor {
 public:
  virtual ~ArmProbabilityPredictor() = default;
  virtual std::vector<double> predict(std::span<const double> x) const = 0;
};

class ScalarPredictor {
 public:
  virtual ~ScalarPredictor() = default;
  virtual double predict(std::span<const double> x) const = 0;
};

using PropensityPredictor = std::shared_ptr<const ArmProbabilityPredictor>;
using RegressionPredictor = std::shared_ptr<const ScalarPredictor>;

enum class TailSide { kBelow, kAbove };

/// Maps raw arm scores to a simplex vector with entries in [kappa, 1-kappa].
/// Binary: clip p1 and set p0 = 1 - p1. Otherwise scale then clip, with the
/// scale found by bisection so the clipped entries sum to one.
std::vector<double> clip_to_simplex(std::vector<double> raw, double kappa);

/// Throws DegenerateArm when an arm is absent from `train`.
PropensityPredictor fit_propensity(const Dataset& train, const NuisanceSpec& spec);

/// Conditional level-`level` quantile of Y within A = arm.
RegressionPredictor fit_quantile(const Dataset& train, int arm, double level, const NuisanceSpec& spec);

/// Regression of Y 1{Y < q(X)} (below) or Y 1{Y > q(X)} (above) within A = arm.
RegressionPredictor fit_rho(const Dataset& train, int arm, TailSide side, RegressionPredictor quantile,
                            const NuisanceSpec& spec);

/// Per-arm nuisance values served at one covariate vector.
struct NuisanceValues {
  std::vector<double> e;
  std::vector<double> q_lower;            // level 1/(1+lambda)
  std::vector<double> rho_below_lower;    // E[Y 1{Y < q_lower}]
  std::vector<double> rho_above_lower;    // E[Y 1{Y > q_lower}]
  std::vector<double> q_upper;            // level lambda/(1+lambda); empty unless fitted
  std::vector<double> rho_below_upper;
  std::vector<double> rho_above_upper;
  bool rearranged = false;                // a lower/upper quantile pair was swapped

  bool has_upper() const noexcept { return !q_upper.empty(); }
};

struct ArmNuisance {
  RegressionPredictor q_lower;
  RegressionPredictor q_upper;
  RegressionPredictor rho_below_lower;
  RegressionPredictor rho_above_lower;
  RegressionPredictor rho_below_upper;
  RegressionPredictor rho_above_upper;
  RegressionPredictor raw_lower;  // unordered quantile fits, set with the upper level
  RegressionPredictor raw_upper;
};

struct FoldNuisance {
  PropensityPredictor propensity;
  std::vector<ArmNuisance> arms;
};

/// Cross-fitted nuisances: the predictors for fold k were trained on the
/// units outside fold k.
class NuisanceModel {
 public:
  NuisanceModel(FoldAssignment folds, SensitivityParam lambda, int m, bool has_upper,
                std::vector<FoldNuisance> fits);

  const FoldAssignment& folds() const noexcept { return folds_; }
  const SensitivityParam& lambda() const noexcept { return lambda_; }
  int m() const noexcept { return m_; }
  bool has_upper() const noexcept { return has_upper_; }

  /// Values from fold `fold`'s predictors. Quantile pairs are put in order.
  NuisanceValues predict(int fold, std::span<const double> x) const;

  /// Values served to training unit i, i.e. from fold fold_of[i].
  NuisanceValues predict_for_unit(std::size_t i, std::span<const double> x) const {
    return predict(folds_.fold_of.at(i), x);
  }

 private:
  FoldAssignment folds_;
  SensitivityParam lambda_;
  int m_;
  bool has_upper_;
  std::vector<FoldNuisance> fits_;
};

/// Propensity models for every fold, reusable across lambda values.
std::vector<PropensityPredictor> fit_crossfit_propensity(const Dataset& data, const FoldAssignment& folds,
                                                         const NuisanceSpec& spec);

/// Cross-fitting on a given fold assignment. Pass `propensities` from
/// fit_crossfit_propensity to skip refitting them.
NuisanceModel fit_crossfit(const Dataset& data, const NuisanceSpec& spec, const FoldAssignment& folds,
                           std::vector<PropensityPredictor> propensities = {});

/// Cross-fitting with folds from make_folds(n, spec.folds, seed).
NuisanceModel fit_crossfit(const Dataset& data, const NuisanceSpec& spec, std::uint64_t seed);

}  // namespace msmpolicy
