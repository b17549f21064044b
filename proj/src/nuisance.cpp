#include "msmpolicy/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "msmpolicy/error.hpp"
#include "msmpolicy/knn.hpp"
#include "msmpolicy/parallel.hpp"
#include "msmpolicy/stats.hpp"

namespace msmpolicy {

void NuisanceSpec::validate(int m) const {
  if (!(clip_kappa > 0.0 && clip_kappa < 0.5)) throw Error(ErrorCode::kBadConfig, "clip_kappa must lie in (0, 0.5)");
  if (clip_kappa * m > 1.0) throw Error(ErrorCode::kBadConfig, "clip_kappa * m exceeds 1");
  if (learner == LearnerKind::kGbt &&
      (gbt.trees < 1 || gbt.depth < 1 || gbt.learning_rate <= 0.0 || gbt.min_leaf < 1)) {
    throw Error(ErrorCode::kBadConfig, "gbt hyperparameters must be positive");
  }
  if (learner == LearnerKind::kOracle && !oracle) {
    throw Error(ErrorCode::kMissingNuisance, "oracle learner selected without a registered oracle");
  }
  if (learner == LearnerKind::kOracle && oracle->arms() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "oracle arm count differs from the dataset");
  }
}

std::vector<double> clip_to_simplex(std::vector<double> raw, double kappa) {
  const std::size_t m = raw.size();
  if (m == 2) {
    const double p1 = std::clamp(raw[1], kappa, 1.0 - kappa);
    return {1.0 - p1, p1};
  }
  double total = 0.0;
  for (double& v : raw) {
    v = std::max(0.0, v);
    total += v;
  }
  if (total <= 0.0) return std::vector<double>(m, 1.0 / static_cast<double>(m));
  auto clipped_sum = [&](double c) {
    double s = 0.0;
    for (double v : raw) s += std::clamp(c * v, kappa, 1.0 - kappa);
    return s;
  };
  double lo = 0.0;
  double hi = 1.0 / total;
  while (clipped_sum(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (clipped_sum(mid) < 1.0 ? lo : hi) = mid;
  }
  std::vector<double> out(m);
  for (std::size_t a = 0; a < m; ++a) out[a] = std::clamp(hi * raw[a], kappa, 1.0 - kappa);
  return out;
}

namespace {

void require_arm(const Dataset& train, int arm) {
  for (const auto& row : train.rows()) {
    if (row.a == arm) return;
  }
  throw Error(ErrorCode::kDegenerateArm, "arm " + std::to_string(arm) + " has no training units");
}

std::size_t neighbor_count(const NuisanceSpec& spec, std::size_t n) {
  return spec.knn_neighbors > 0 ? spec.knn_neighbors : default_neighbor_count(n);
}

std::vector<double> outcomes(const Dataset& data) {
  std::vector<double> y;
  y.reserve(data.n());
  for (const auto& row : data.rows()) y.push_back(row.y);
  return y;
}

class GbtPropensity final : public ArmProbabilityPredictor {
 public:
  GbtPropensity(std::vector<GbtRegressor> models, double kappa) : models_(std::move(models)), kappa_(kappa) {}

  std::vector<double> predict(std::span<const double> x) const override {
    if (models_.size() == 1) {
      const double p = sigmoid(models_[0].predict(x));
      return clip_to_simplex({1.0 - p, p}, kappa_);
    }
    std::vector<double> raw;
    raw.reserve(models_.size());
    for (const auto& model : models_) raw.push_back(sigmoid(model.predict(x)));
    return clip_to_simplex(std::move(raw), kappa_);
  }

 private:
  std::vector<GbtRegressor> models_;
  double kappa_;
};

class KnnPropensity final : public ArmProbabilityPredictor {
 public:
  KnnPropensity(const Dataset& train, std::size_t k, double kappa)
      : index_(train), k_(k), m_(train.m()), kappa_(kappa) {
    for (const auto& row : train.rows()) arms_.push_back(row.a);
  }

  std::vector<double> predict(std::span<const double> x) const override {
    const auto nb = index_.neighbors(x, k_);
    std::vector<double> freq(static_cast<std::size_t>(m_), 0.0);
    for (std::size_t i : nb) freq[static_cast<std::size_t>(arms_[i])] += 1.0;
    for (double& f : freq) f /= static_cast<double>(nb.size());
    return clip_to_simplex(std::move(freq), kappa_);
  }

 private:
  KnnIndex index_;
  std::vector<int> arms_;
  std::size_t k_;
  int m_;
  double kappa_;
};

class OraclePropensity final : public ArmProbabilityPredictor {
 public:
  explicit OraclePropensity(std::shared_ptr<const NuisanceOracle> oracle) : oracle_(std::move(oracle)) {}
  std::vector<double> predict(std::span<const double> x) const override { return oracle_->propensity(x); }

 private:
  std::shared_ptr<const NuisanceOracle> oracle_;
};

class GbtScalar final : public ScalarPredictor {
 public:
  explicit GbtScalar(GbtRegressor model) : model_(std::move(model)) {}
  double predict(std::span<const double> x) const override { return model_.predict(x); }

 private:
  GbtRegressor model_;
};

/// Neighbour statistic over a fixed per-row target: quantile or mean.
class KnnScalar final : public ScalarPredictor {
 public:
  KnnScalar(const Dataset& train, std::vector<double> target, std::size_t k, double level, bool quantile)
      : index_(train), target_(std::move(target)), k_(k), level_(level), quantile_(quantile) {}

  double predict(std::span<const double> x) const override {
    const auto nb = index_.neighbors(x, k_);
    std::vector<double> v;
    v.reserve(nb.size());
    for (std::size_t i : nb) v.push_back(target_[i]);
    return quantile_ ? empirical_quantile_inplace(v, level_) : mean(v);
  }

 private:
  KnnIndex index_;
  std::vector<double> target_;
  std::size_t k_;
  double level_;
  bool quantile_;
};

class OracleQuantile final : public ScalarPredictor {
 public:
  OracleQuantile(std::shared_ptr<const NuisanceOracle> oracle, int arm, double level)
      : oracle_(std::move(oracle)), arm_(arm), level_(level) {}
  double predict(std::span<const double> x) const override { return oracle_->quantile(x, arm_, level_); }

 private:
  std::shared_ptr<const NuisanceOracle> oracle_;
  int arm_;
  double level_;
};

class OracleTail final : public ScalarPredictor {
 public:
  OracleTail(std::shared_ptr<const NuisanceOracle> oracle, int arm, TailSide side, RegressionPredictor q)
      : oracle_(std::move(oracle)), arm_(arm), side_(side), q_(std::move(q)) {}
  double predict(std::span<const double> x) const override {
    const double c = q_->predict(x);
    return side_ == TailSide::kBelow ? oracle_->mean_below(x, arm_, c) : oracle_->mean_above(x, arm_, c);
  }

 private:
  std::shared_ptr<const NuisanceOracle> oracle_;
  int arm_;
  TailSide side_;
  RegressionPredictor q_;
};

/// Lower or upper member of a quantile pair after monotone rearrangement.
class OrderedQuantile final : public ScalarPredictor {
 public:
  OrderedQuantile(RegressionPredictor lower, RegressionPredictor upper, bool take_upper)
      : lower_(std::move(lower)), upper_(std::move(upper)), take_upper_(take_upper) {}
  double predict(std::span<const double> x) const override {
    const double a = lower_->predict(x);
    const double b = upper_->predict(x);
    return take_upper_ ? std::max(a, b) : std::min(a, b);
  }

 private:
  RegressionPredictor lower_;
  RegressionPredictor upper_;
  bool take_upper_;
};

}  // namespace

PropensityPredictor fit_propensity(const Dataset& train, const NuisanceSpec& spec) {
  if (train.n() == 0) throw Error(ErrorCode::kEmptyData, "propensity training set is empty");
  const int m = train.m();
  for (int a = 0; a < m; ++a) require_arm(train, a);
  switch (spec.learner) {
    case LearnerKind::kOracle:
      return std::make_shared<OraclePropensity>(spec.oracle);
    case LearnerKind::kKnn:
      return std::make_shared<KnnPropensity>(train, neighbor_count(spec, train.n()), spec.clip_kappa);
    case LearnerKind::kGbt: {
      const FeatureMatrix x(train);
      std::vector<GbtRegressor> models;
      const int targets = m == 2 ? 1 : m;
      for (int t = 0; t < targets; ++t) {
        const int arm = m == 2 ? 1 : t;
        std::vector<double> label(train.n());
        for (std::size_t i = 0; i < train.n(); ++i) label[i] = train[i].a == arm ? 1.0 : 0.0;
        models.push_back(GbtRegressor::fit(x, label, GbtLoss::kLogistic, spec.gbt));
      }
      return std::make_shared<GbtPropensity>(std::move(models), spec.clip_kappa);
    }
  }
  throw Error(ErrorCode::kBadConfig, "unknown learner");
}

RegressionPredictor fit_quantile(const Dataset& train, int arm, double level, const NuisanceSpec& spec) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::kBadConfig, "quantile level must lie in (0,1)");
  if (spec.learner == LearnerKind::kOracle) return std::make_shared<OracleQuantile>(spec.oracle, arm, level);
  require_arm(train, arm);
  const Dataset sub = train.arm_subset(arm);
  auto y = outcomes(sub);
  if (spec.learner == LearnerKind::kKnn) {
    return std::make_shared<KnnScalar>(sub, std::move(y), neighbor_count(spec, sub.n()), level, true);
  }
  return std::make_shared<GbtScalar>(GbtRegressor::fit(FeatureMatrix(sub), y, GbtLoss::kPinball, spec.gbt, level));
}

namespace {

// Tail regression on an arm subset with the quantile already evaluated at
// each of its rows.
RegressionPredictor fit_tail(const Dataset& sub, std::span<const double> q, TailSide side,
                             const NuisanceSpec& spec) {
  std::vector<double> pseudo(sub.n());
  for (std::size_t i = 0; i < sub.n(); ++i) {
    const double y = sub[i].y;
    const bool keep = side == TailSide::kBelow ? y < q[i] : y > q[i];
    pseudo[i] = keep ? y : 0.0;
  }
  if (spec.learner == LearnerKind::kKnn) {
    return std::make_shared<KnnScalar>(sub, std::move(pseudo), neighbor_count(spec, sub.n()), 0.5, false);
  }
  return std::make_shared<GbtScalar>(GbtRegressor::fit(FeatureMatrix(sub), pseudo, GbtLoss::kSquared, spec.gbt));
}

std::vector<double> predict_rows(const Dataset& sub, const ScalarPredictor& model) {
  std::vector<double> out(sub.n());
  for (std::size_t i = 0; i < sub.n(); ++i) out[i] = model.predict(sub[i].x);
  return out;
}

}  // namespace

RegressionPredictor fit_rho(const Dataset& train, int arm, TailSide side, RegressionPredictor quantile,
                            const NuisanceSpec& spec) {
  if (spec.learner == LearnerKind::kOracle) {
    return std::make_shared<OracleTail>(spec.oracle, arm, side, std::move(quantile));
  }
  require_arm(train, arm);
  const Dataset sub = train.arm_subset(arm);
  return fit_tail(sub, predict_rows(sub, *quantile), side, spec);
}

NuisanceModel::NuisanceModel(FoldAssignment folds, SensitivityParam lambda, int m, bool has_upper,
                             std::vector<FoldNuisance> fits)
    : folds_(std::move(folds)), lambda_(lambda), m_(m), has_upper_(has_upper), fits_(std::move(fits)) {}

NuisanceValues NuisanceModel::predict(int fold, std::span<const double> x) const {
  const auto& fit = fits_.at(static_cast<std::size_t>(fold));
  NuisanceValues v;
  v.e = fit.propensity->predict(x);
  const auto m = static_cast<std::size_t>(m_);
  v.q_lower.resize(m);
  v.rho_below_lower.resize(m);
  v.rho_above_lower.resize(m);
  if (has_upper_) {
    v.q_upper.resize(m);
    v.rho_below_upper.resize(m);
    v.rho_above_upper.resize(m);
  }
  for (std::size_t a = 0; a < m; ++a) {
    const auto& arm = fit.arms[a];
    v.rho_below_lower[a] = arm.rho_below_lower->predict(x);
    v.rho_above_lower[a] = arm.rho_above_lower->predict(x);
    if (has_upper_) {
      const double lo = arm.raw_lower->predict(x);
      const double hi = arm.raw_upper->predict(x);
      v.rearranged = v.rearranged || lo > hi;
      v.q_lower[a] = std::min(lo, hi);
      v.q_upper[a] = std::max(lo, hi);
      v.rho_below_upper[a] = arm.rho_below_upper->predict(x);
      v.rho_above_upper[a] = arm.rho_above_upper->predict(x);
    } else {
      v.q_lower[a] = arm.q_lower->predict(x);
    }
  }
  return v;
}

std::vector<PropensityPredictor> fit_crossfit_propensity(const Dataset& data, const FoldAssignment& folds,
                                                         const NuisanceSpec& spec) {
  spec.validate(data.m());
  if (folds.n() != data.n()) throw Error(ErrorCode::kDimensionMismatch, "fold assignment size != n");
  std::vector<PropensityPredictor> out(static_cast<std::size_t>(folds.k));
  parallel_for(out.size(), spec.threads, [&](std::size_t k) {
    const auto idx = folds.complement(static_cast<int>(k));
    out[k] = fit_propensity(data.subset(idx), spec);
  });
  return out;
}

NuisanceModel fit_crossfit(const Dataset& data, const NuisanceSpec& spec, const FoldAssignment& folds,
                           std::vector<PropensityPredictor> propensities) {
  spec.validate(data.m());
  if (folds.n() != data.n()) throw Error(ErrorCode::kDimensionMismatch, "fold assignment size != n");
  const auto k_count = static_cast<std::size_t>(folds.k);
  if (!propensities.empty() && propensities.size() != k_count) {
    throw Error(ErrorCode::kMissingNuisance, "propensity models do not match the fold count");
  }
  const int m = data.m();
  const double lo = spec.lambda.lower_level();
  const double hi = spec.lambda.upper_level();
  std::vector<FoldNuisance> fits(k_count);
  parallel_for(k_count, spec.threads, [&](std::size_t k) {
    const auto idx = folds.complement(static_cast<int>(k));
    const Dataset train = data.subset(idx);
    auto& fit = fits[k];
    fit.propensity = propensities.empty() ? fit_propensity(train, spec) : propensities[k];
    for (int a = 0; a < m; ++a) {
      ArmNuisance arm;
      auto raw_lower = fit_quantile(train, a, lo, spec);
      if (spec.fit_upper) {
        auto raw_upper = fit_quantile(train, a, hi, spec);
        arm.q_lower = std::make_shared<OrderedQuantile>(raw_lower, raw_upper, false);
        arm.q_upper = std::make_shared<OrderedQuantile>(raw_lower, raw_upper, true);
        arm.raw_lower = raw_lower;
        arm.raw_upper = raw_upper;
      } else {
        arm.q_lower = raw_lower;
      }
      if (spec.learner == LearnerKind::kOracle) {
        arm.rho_below_lower = fit_rho(train, a, TailSide::kBelow, arm.q_lower, spec);
        arm.rho_above_lower = fit_rho(train, a, TailSide::kAbove, arm.q_lower, spec);
        if (spec.fit_upper) {
          arm.rho_below_upper = fit_rho(train, a, TailSide::kBelow, arm.q_upper, spec);
          arm.rho_above_upper = fit_rho(train, a, TailSide::kAbove, arm.q_upper, spec);
        }
      } else {
        // Same fits as fit_rho, with each quantile evaluated once per row.
        const Dataset sub = train.arm_subset(a);
        std::vector<double> q_lo = predict_rows(sub, *raw_lower);
        if (spec.fit_upper) {
          std::vector<double> q_hi = predict_rows(sub, *arm.raw_upper);
          for (std::size_t i = 0; i < q_lo.size(); ++i) {
            if (q_lo[i] > q_hi[i]) std::swap(q_lo[i], q_hi[i]);
          }
          arm.rho_below_upper = fit_tail(sub, q_hi, TailSide::kBelow, spec);
          arm.rho_above_upper = fit_tail(sub, q_hi, TailSide::kAbove, spec);
        }
        arm.rho_below_lower = fit_tail(sub, q_lo, TailSide::kBelow, spec);
        arm.rho_above_lower = fit_tail(sub, q_lo, TailSide::kAbove, spec);
      }
      fit.arms.push_back(std::move(arm));
    }
  });
  return NuisanceModel(folds, spec.lambda, m, spec.fit_upper, std::move(fits));
}

NuisanceModel fit_crossfit(const Dataset& data, const NuisanceSpec& spec, std::uint64_t seed) {
  return fit_crossfit(data, spec, make_folds(data.n(), spec.folds, seed));
}

}  // namespace msmpolicy
