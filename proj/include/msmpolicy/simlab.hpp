#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "msmpolicy/bounds.hpp"
#include "msmpolicy/dataset.hpp"
#include "msmpolicy/learn.hpp"
#include "msmpolicy/nuisance.hpp"
#include "msmpolicy/policy.hpp"
#include "msmpolicy/sensitivity.hpp"

namespace msmpolicy {

/// Finite mixture of normals sharing one standard deviation.
class NormalMixture {
 public:
  NormalMixture(std::vector<double> weights, std::vector<double> means, double sd);

  double cdf(double y) const;
  double mean() const;
  /// inf{q : F(q) >= level}, by bracketed root finding to 1e-12.
  double quantile(double level) const;
  /// E[Y 1{Y < c}] = sum_k w_k (mu_k Phi(z_k) - sd phi(z_k)), z_k = (c - mu_k)/sd.
  double mean_below(double c) const;
  double mean_above(double c) const { return mean() - mean_below(c); }
  /// Same law shifted by `delta`.
  NormalMixture shifted(double delta) const;

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& means() const noexcept { return means_; }
  double sd() const noexcept { return sd_; }

 private:
  std::vector<double> weights_;
  std::vector<double> means_;
  double sd_;
};

/// Binary-treatment simulation design with a latent binary confounder U:
///   X ~ N(mu_x, I_2)
///   e(X) = sigmoid(zeta(X)'theta),
///     zeta(X) = [max(x1,0), x1 x2^2/10, sin(x2^2), x1, x2, 1]
///   U | X ~ Bern(L/(1+L) e(X) + 1/(1+L) (1 - e(X))),  L = exp(log_lambda_star)
///   A | U, X ~ Bern(e(X) / (e(X) + L^{1-2U} (1 - e(X))))
///   Y(a) = beta_cons + beta_a a + X'beta_x + a X'beta_xa + beta_u U + noise_sd eps
struct DgpConfig {
  double log_lambda_star = 1.5;
  std::array<double, 2> mu_x{-1.0, 1.0};
  std::array<double, 6> theta{0.2, 0.4, 0.1, -0.1, 0.5, -0.5};
  double beta_cons = -0.2;
  double beta_a = -0.1;
  std::array<double, 2> beta_x{1.0, -1.0};
  std::array<double, 2> beta_xa{0.2, 0.4};
  double beta_u = 1.5;
  double noise_sd = 1.0;

  void validate() const;
  double lambda_star() const;
};

struct PotentialSample {
  std::vector<double> x;
  int u = 0;
  int a = 0;
  double y0 = 0.0;
  double y1 = 0.0;
  double y = 0.0;
};

/// Closed-form quantities of the design.
class DgpModel {
 public:
  explicit DgpModel(DgpConfig config);

  const DgpConfig& config() const noexcept { return config_; }
  /// Nominal propensity P(A = 1 | X = x).
  double propensity(std::span<const double> x) const;
  /// P(U = 1 | X = x).
  double latent_probability(std::span<const double> x) const;
  /// P(A = 1 | X = x, U = u).
  double true_propensity(std::span<const double> x, int u) const;
  /// E[Y(a) | X = x, U = 0].
  double outcome_base(std::span<const double> x, int a) const;
  /// P(U = 1 | X = x, A = a); constant in x for this design.
  double latent_given_arm(int a) const;
  /// Law of Y given X = x, A = a.
  NormalMixture outcome_law(std::span<const double> x, int a) const;
  /// E[Y(1) - Y(0) | X = x].
  double cate(std::span<const double> x) const;

 private:
  DgpConfig config_;
};

/// n draws; deterministic in seed.
std::vector<PotentialSample> generate(const DgpConfig& config, std::size_t n, std::uint64_t seed);
/// Observed (x, a, y) view.
Dataset to_dataset(const std::vector<PotentialSample>& samples);

/// Exact nuisances of the design. Propensities are the true nominal ones
/// (no clipping). Quantile offsets from the arm's base mean are cached per
/// (arm, level) since the offset law does not depend on x.
class DgpOracle final : public NuisanceOracle {
 public:
  explicit DgpOracle(DgpConfig config);

  int arms() const override { return 2; }
  std::vector<double> propensity(std::span<const double> x) const override;
  double quantile(std::span<const double> x, int arm, double level) const override;
  double mean_below(std::span<const double> x, int arm, double c) const override;
  double mean_above(std::span<const double> x, int arm, double c) const override;

  const DgpModel& model() const noexcept { return model_; }
  /// Sharp bounds on E[Y(a) | x] at lambda.
  double mu_bound(std::span<const double> x, int arm, const SensitivityParam& lambda, BoundSide side) const;

 private:
  double quantile_offset(int arm, double level) const;

  DgpModel model_;
  std::array<NormalMixture, 2> offset_law_;  // law of Y - outcome_base(x, a) given A = a
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, double>, double> offset_cache_;
};

/// Per-unit oracle bound values on an evaluation sample at one lambda.
struct OracleBounds {
  double log_lambda = 0.0;
  std::vector<double> mu_lower_1;
  std::vector<double> mu_lower_0;
  std::vector<double> tau_lower;  // mu_lower_1 - mu_upper_0
};

OracleBounds oracle_bounds(const DgpOracle& oracle, const std::vector<PotentialSample>& sample,
                           const SensitivityParam& lambda, int threads = 1);

struct EvalMetrics {
  double treated_fraction = 0.0;
  double expected_welfare = 0.0;   // mean of pi y1 + (1 - pi) y0
  double worst_welfare = 0.0;      // mean of pi mu_lower_1 + (1 - pi) mu_lower_0
  double worst_improvement = 0.0;  // mean of pi tau_lower
};

EvalMetrics evaluate_policy(const Policy& policy, const std::vector<PotentialSample>& sample,
                            const OracleBounds& bounds);

/// Best in-class values of the oracle criteria on the evaluation sample.
/// Exact for quadrant and tree classes; for the logistic class the value is
/// a multi-restart lower bound and `exact` is false.
struct ClassOptimum {
  double worst_welfare = 0.0;
  double worst_improvement = 0.0;
  bool exact = true;
};

ClassOptimum class_optimum(const PolicyClassSpec& cls, const std::vector<PotentialSample>& sample,
                           const OracleBounds& bounds, std::uint64_t seed, int threads = 1);

struct Regret {
  double crw = 0.0;
  double cri = 0.0;
  bool exact = true;
};

/// Regrets against the class optimum. When the optimum is only a lower bound
/// it is raised to the policy's own value, so regrets stay nonnegative.
Regret estimate_regret(const EvalMetrics& metrics, const ClassOptimum& optimum);

/// W and Delta of a policy under the design by tensor Gauss-Legendre
/// quadrature over X: each axis covers mu_x +- 10, split at x1 = 0 and at the policy's
/// thresholds on that axis, with `nodes` points per piece. The mixture over
/// U enters through exact sums.
struct IntegratedCriteria {
  double worst_welfare = 0.0;
  double worst_improvement = 0.0;
};
IntegratedCriteria integrate_criteria(const DgpOracle& oracle, const Policy& policy, const SensitivityParam& lambda,
                                      int nodes = 64);

enum class SweepMethod { kAw, kMmw, kMmi };
std::string_view to_string(SweepMethod method);
SweepMethod sweep_method_from_string(std::string_view name);

struct SweepConfig {
  DgpConfig dgp;
  std::vector<double> log_lambda_grid;
  std::vector<SweepMethod> methods{SweepMethod::kAw, SweepMethod::kMmw, SweepMethod::kMmi};
  int reps = 100;
  std::size_t n = 2000;
  std::size_t eval_n = 100000;
  std::uint64_t seed = 0;
  NuisanceSpec nuisance;
  PolicyClassSpec policy;
  int threads = 1;
  int regret_restarts = 2;  // logistic class optimum on the evaluation sample
  int regret_max_iter = 200;
};

struct SweepRow {
  double log_lambda = 0.0;
  int rep = 0;
  SweepMethod method = SweepMethod::kAw;
  EvalMetrics metrics;
  Regret regret;
};

struct SweepSummary {
  double log_lambda = 0.0;
  SweepMethod method = SweepMethod::kAw;
  int reps = 0;
  EvalMetrics mean;
  EvalMetrics sd;  // across repetitions
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (log_lambda, rep, method)
  std::vector<SweepSummary> summary;
};

/// Repetition r uses seed mix_seed(config.seed, r); the evaluation sample uses
/// a separate stream of config.seed and is shared by all repetitions. AW is
/// the MMW pipeline at lambda = 1, evaluated at every grid point.
SweepResult run_sweep(const SweepConfig& config, const std::function<void(int)>& on_rep_done = {});

/// Mean and SD across repetitions per (log_lambda, method).
std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);

/// `log_lambda,rep,method,treated_frac,exp_welfare,worst_welfare,worst_improvement,crw_regret,cri_regret`.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace msmpolicy
