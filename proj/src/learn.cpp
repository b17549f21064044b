#include "msmpolicy/learn.hpp"

#include <numeric>
#include <string>
#include <utility>

#include "msmpolicy/error.hpp"
#include "msmpolicy/random.hpp"

namespace msmpolicy {

std::string_view to_string(PolicyClass cls) {
  switch (cls) {
    case PolicyClass::kQuadrant: return "quadrant";
    case PolicyClass::kTree: return "tree";
    case PolicyClass::kLogistic: return "logistic";
  }
  return "unknown";
}

PolicyClass policy_class_from_string(std::string_view name) {
  if (name == "quadrant") return PolicyClass::kQuadrant;
  if (name == "tree") return PolicyClass::kTree;
  if (name == "logistic") return PolicyClass::kLogistic;
  throw Error(ErrorCode::kUnsupportedClass, "unknown policy class '" + std::string(name) + "'");
}

std::string_view to_string(Method method) { return method == Method::kMmw ? "mmw" : "mmi"; }

Method method_from_string(std::string_view name) {
  if (name == "mmw") return Method::kMmw;
  if (name == "mmi") return Method::kMmi;
  throw Error(ErrorCode::kBadConfig, "unknown method '" + std::string(name) + "'");
}

std::vector<std::size_t> policy_features(const PolicyClassSpec& spec, std::size_t d) {
  if (!spec.features.empty()) {
    for (std::size_t f : spec.features) {
      if (f >= d) throw Error(ErrorCode::kBadConfig, "policy feature index " + std::to_string(f) + " out of range");
    }
    return spec.features;
  }
  if (spec.cls == PolicyClass::kQuadrant) return {0, 1};
  std::vector<std::size_t> all(d);
  std::iota(all.begin(), all.end(), 0);
  return all;
}

OptimizeResult optimize_policy(const ScoreTable& table, Method method, const PolicyClassSpec& spec,
                               std::uint64_t seed, int threads) {
  const int m = table.m();
  if (method == Method::kMmi && m != 2) throw Error(ErrorCode::kNotBinary, "MMI needs exactly two arms");
  if (spec.cls != PolicyClass::kTree && m != 2) {
    throw Error(ErrorCode::kUnsupportedClassForArms,
                std::string(to_string(spec.cls)) + " policies need exactly two arms");
  }
  if (table.n() == 0) throw Error(ErrorCode::kEmptyData, "no units to optimise over");
  const std::size_t d = table.x(0).size();
  const auto features = policy_features(spec, d);
  CovariateRows x(table.n());
  for (std::size_t i = 0; i < table.n(); ++i) x[i] = table.x(i);

  std::vector<double> gains;
  if (m == 2) gains = method == Method::kMmw ? table.gains_mmw() : table.gains_mmi();

  OptimizeResult out{Policy::always(0, m), 0.0, true};
  switch (spec.cls) {
    case PolicyClass::kQuadrant: {
      if (features.size() != 2) throw Error(ErrorCode::kNeedTwoFeatures, "quadrant class needs two features");
      const auto r = quadrant_search(gains, x, features[0], features[1]);
      out.policy = Policy(r.policy, 2);
      break;
    }
    case PolicyClass::kTree: {
      std::vector<double> gamma(table.n() * static_cast<std::size_t>(m));
      for (std::size_t i = 0; i < table.n(); ++i) {
        if (method == Method::kMmw) {
          for (int a = 0; a < m; ++a) gamma[i * static_cast<std::size_t>(m) + a] = table.phi_minus(i, a);
        } else {
          gamma[2 * i] = 0.0;
          gamma[2 * i + 1] = gains[i];
        }
      }
      const auto r = tree_search(gamma, m, x, features, spec.depth);
      out.policy = Policy(r.policy, m);
      break;
    }
    case PolicyClass::kLogistic: {
      LogisticSearchOptions options;
      options.restarts = spec.restarts;
      options.max_iter = spec.max_iter;
      options.seed = seed;
      options.threads = threads;
      const auto r = logistic_ascent(gains, x, features, spec.basis, options);
      out.policy = Policy(r.policy, 2);
      out.converged = r.converged;
      break;
    }
  }
  out.objective = method == Method::kMmw ? estimate_W(table, out.policy).mean : estimate_Delta(table, out.policy).mean;
  return out;
}

FoldAssignment learning_folds(std::size_t n, int k, std::uint64_t seed) {
  return make_folds(n, k, mix_seed(seed, 0));
}

FittedScores fit_scores(const Dataset& data, NuisanceSpec spec, const SensitivityParam& lambda, bool need_plus,
                        std::uint64_t seed, const std::vector<PropensityPredictor>& propensities) {
  spec.lambda = lambda;
  spec.fit_upper = need_plus;
  const FoldAssignment folds = learning_folds(data.n(), spec.folds, seed);
  const NuisanceModel model = fit_crossfit(data, spec, folds, propensities);
  std::size_t rearranged = 0;
  const ScoreSource source = spec.learner == LearnerKind::kOracle ? ScoreSource::kOracle : ScoreSource::kCrossfit;
  ScoreTable table = build_score_table(data, model, need_plus, spec.threads, source, &rearranged);
  return FittedScores{std::move(table), rearranged};
}

double treated_fraction(const ScoreTable& table, const Policy& policy) {
  double s = 0.0;
  for (std::size_t i = 0; i < table.n(); ++i) s += policy.treat_probability(table.x(i));
  return table.n() == 0 ? 0.0 : s / static_cast<double>(table.n());
}

namespace {

LearnResult learn(const Dataset& data, NuisanceSpec spec, const SensitivityParam& lambda, const PolicyClassSpec& cls,
                  std::uint64_t seed, Method method) {
  if (method == Method::kMmi && data.m() != 2) throw Error(ErrorCode::kNotBinary, "MMI needs exactly two arms");
  if (cls.cls != PolicyClass::kTree && data.m() != 2) {
    throw Error(ErrorCode::kUnsupportedClassForArms,
                std::string(to_string(cls.cls)) + " policies need exactly two arms");
  }
  const int threads = spec.threads;
  const FittedScores fitted = fit_scores(data, std::move(spec), lambda, method == Method::kMmi, seed);
  const OptimizeResult opt = optimize_policy(fitted.table, method, cls, mix_seed(seed, 1), threads);
  LearnResult out{opt.policy, {}, 0.0, opt.converged, fitted.rearranged_units};
  out.value = method == Method::kMmw ? estimate_W(fitted.table, opt.policy) : estimate_Delta(fitted.table, opt.policy);
  if (data.m() == 2) out.treated_fraction = treated_fraction(fitted.table, opt.policy);
  return out;
}

}  // namespace

LearnResult learn_mmw(const Dataset& data, NuisanceSpec spec, const SensitivityParam& lambda,
                      const PolicyClassSpec& cls, std::uint64_t seed) {
  return learn(data, std::move(spec), lambda, cls, seed, Method::kMmw);
}

LearnResult learn_mmi(const Dataset& data, NuisanceSpec spec, const SensitivityParam& lambda,
                      const PolicyClassSpec& cls, std::uint64_t seed) {
  return learn(data, std::move(spec), lambda, cls, seed, Method::kMmi);
}

}  // namespace msmpolicy
