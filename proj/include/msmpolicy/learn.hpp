#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "msmpolicy/dataset.hpp"
#include "msmpolicy/nuisance.hpp"
#include "msmpolicy/policy.hpp"
#include "msmpolicy/policy_search.hpp"
#include "msmpolicy/scores.hpp"

namespace msmpolicy {

enum class PolicyClass { kQuadrant, kTree, kLogistic };
enum class Method { kMmw, kMmi };

std::string_view to_string(PolicyClass cls);
PolicyClass policy_class_from_string(std::string_view name);
std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct PolicyClassSpec {
  PolicyClass cls = PolicyClass::kQuadrant;
  std::vector<std::size_t> features;  // empty: {0, 1} for quadrant, all covariates otherwise
  int depth = 2;                      // tree only
  Basis basis = Basis::kIdentity;     // logistic only
  int restarts = 20;
  int max_iter = 500;
};

/// Resolved feature list for a class and covariate dimension d.
std::vector<std::size_t> policy_features(const PolicyClassSpec& spec, std::size_t d);

struct OptimizeResult {
  Policy policy;
  double objective = 0.0;  // in-sample criterion the optimiser maximised (mean)
  bool converged = true;   // false only when logistic ascent stopped early
};

/// Maximises the criterion over the class on fixed scores.
///   MMW: mean psi_w; binary classes use gains phi_minus_1 - phi_minus_0 and
///        trees use the rows phi_minus_a for any m.
///   MMI: mean psi_delta with gains phi_minus_1 - phi_plus_0 (binary only).
/// Throws UnsupportedClassForArms (quadrant/logistic with m != 2) and
/// NotBinary (MMI with m != 2).
OptimizeResult optimize_policy(const ScoreTable& table, Method method, const PolicyClassSpec& spec,
                               std::uint64_t seed, int threads = 1);

struct LearnResult {
  Policy policy;
  MeanSe value;  // estimated W (MMW) or Delta (MMI) of the returned policy
  double treated_fraction = 0.0;
  bool converged = true;
  std::size_t rearranged_units = 0;  // units whose quantile pair was put in order
};

/// Cross-fits the nuisances at `lambda`, scores, and optimises the MMW
/// criterion. Folds come from mix_seed(seed, 0), logistic starts from
/// mix_seed(seed, 1).
LearnResult learn_mmw(const Dataset& data, NuisanceSpec spec, const SensitivityParam& lambda,
                      const PolicyClassSpec& cls, std::uint64_t seed);
/// As learn_mmw for the MMI criterion (binary only).
LearnResult learn_mmi(const Dataset& data, NuisanceSpec spec, const SensitivityParam& lambda,
                      const PolicyClassSpec& cls, std::uint64_t seed);

/// Folds used by the learners: make_folds(n, k, mix_seed(seed, 0)).
FoldAssignment learning_folds(std::size_t n, int k, std::uint64_t seed);

/// Shared pipeline: returns the score table as well, for callers that
/// evaluate several criteria on the same fit. `propensities`, when given,
/// must come from fit_crossfit_propensity on learning_folds(n, spec.folds, seed).
struct FittedScores {
  ScoreTable table;
  std::size_t rearranged_units = 0;
};
FittedScores fit_scores(const Dataset& data, NuisanceSpec spec, const SensitivityParam& lambda, bool need_plus,
                        std::uint64_t seed, const std::vector<PropensityPredictor>& propensities = {});

/// Mean of pi(1|x) over the table's covariates (binary only).
double treated_fraction(const ScoreTable& table, const Policy& policy);

}  // namespace msmpolicy
