#include "msmpolicy/simlab.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <tuple>
#include <utility>

#include "msmpolicy/bounds.hpp"
#include "msmpolicy/error.hpp"
#include "msmpolicy/parallel.hpp"
#include "msmpolicy/policy_search.hpp"
#include "msmpolicy/random.hpp"
#include "msmpolicy/stats.hpp"

namespace msmpolicy {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

// ------------------------------------------------------------ NormalMixture

NormalMixture::NormalMixture(std::vector<double> weights, std::vector<double> means, double sd)
    : weights_(std::move(weights)), means_(std::move(means)), sd_(sd) {
  if (weights_.empty() || weights_.size() != means_.size() || !(sd_ > 0.0) || !std::isfinite(sd_)) {
    throw Error(ErrorCode::kBadLaw, "mixture needs matching weights and means and a positive sd");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (!(weights_[k] >= 0.0) || !std::isfinite(means_[k])) throw Error(ErrorCode::kBadLaw, "bad mixture component");
    total += weights_[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::kBadLaw, "mixture weights do not sum to 1");
}

double NormalMixture::cdf(double y) const {
  double s = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) s += weights_[k] * normal_cdf((y - means_[k]) / sd_);
  return s;
}

double NormalMixture::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) s += weights_[k] * means_[k];
  return s;
}

double NormalMixture::quantile(double level) const {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::kBadConfig, "quantile level must lie in (0,1)");
  const auto [lo_it, hi_it] = std::minmax_element(means_.begin(), means_.end());
  double lo = *lo_it - 40.0 * sd_;
  double hi = *hi_it + 40.0 * sd_;
  auto f = [&](double y) { return cdf(y) - level; };
  const double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) throw Error(ErrorCode::kRootBracketFailure, "quantile not bracketed");
  std::uintmax_t iters = 200;
  const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::max(1.0, std::abs(a)); };
  const auto root = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (root.first + root.second);
}

double NormalMixture::mean_below(double c) const {
  double s = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double z = (c - means_[k]) / sd_;
    s += weights_[k] * (means_[k] * normal_cdf(z) - sd_ * normal_pdf(z));
  }
  return s;
}

NormalMixture NormalMixture::shifted(double delta) const {
  std::vector<double> m = means_;
  for (double& v : m) v += delta;
  return NormalMixture(weights_, std::move(m), sd_);
}

// --------------------------------------------------------------- DgpConfig

void DgpConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  bool ok = finite(log_lambda_star) && log_lambda_star >= 0.0 && finite(beta_cons) && finite(beta_a) &&
            finite(beta_u) && finite(noise_sd) && noise_sd > 0.0;
  for (double v : mu_x) ok = ok && finite(v);
  for (double v : theta) ok = ok && finite(v);
  for (double v : beta_x) ok = ok && finite(v);
  for (double v : beta_xa) ok = ok && finite(v);
  if (!ok) throw Error(ErrorCode::kBadConfig, "design parameters must be finite, log_lambda_star >= 0, noise_sd > 0");
}

double DgpConfig::lambda_star() const { return std::exp(log_lambda_star); }

// ---------------------------------------------------------------- DgpModel

DgpModel::DgpModel(DgpConfig config) : config_(config) { config_.validate(); }

double DgpModel::propensity(std::span<const double> x) const {
  const double x1 = x[0];
  const double x2 = x[1];
  const std::array<double, 6> zeta{std::max(x1, 0.0), x1 * x2 * x2 / 10.0, std::sin(x2 * x2), x1, x2, 1.0};
  double z = 0.0;
  for (std::size_t k = 0; k < 6; ++k) z += zeta[k] * config_.theta[k];
  return sigmoid(z);
}

double DgpModel::latent_probability(std::span<const double> x) const {
  const double l = config_.lambda_star();
  const double e = propensity(x);
  return l / (1.0 + l) * e + 1.0 / (1.0 + l) * (1.0 - e);
}

double DgpModel::true_propensity(std::span<const double> x, int u) const {
  const double e = propensity(x);
  return e / (e + std::pow(config_.lambda_star(), 1 - 2 * u) * (1.0 - e));
}

double DgpModel::outcome_base(std::span<const double> x, int a) const {
  const double arm = a == 1 ? 1.0 : 0.0;
  return config_.beta_cons + config_.beta_a * arm + x[0] * config_.beta_x[0] + x[1] * config_.beta_x[1] +
         arm * (x[0] * config_.beta_xa[0] + x[1] * config_.beta_xa[1]);
}

double DgpModel::latent_given_arm(int a) const {
  const double l = config_.lambda_star();
  return a == 1 ? l / (1.0 + l) : 1.0 / (1.0 + l);
}

NormalMixture DgpModel::outcome_law(std::span<const double> x, int a) const {
  const double w = latent_given_arm(a);
  const double base = outcome_base(x, a);
  return NormalMixture({1.0 - w, w}, {base, base + config_.beta_u}, config_.noise_sd);
}

double DgpModel::cate(std::span<const double> x) const { return outcome_base(x, 1) - outcome_base(x, 0); }

std::vector<PotentialSample> generate(const DgpConfig& config, std::size_t n, std::uint64_t seed) {
  const DgpModel model(config);
  Rng rng(seed);
  std::vector<PotentialSample> out(n);
  for (auto& s : out) {
    s.x = {rng.normal(config.mu_x[0], 1.0), rng.normal(config.mu_x[1], 1.0)};
    s.u = rng.bernoulli(model.latent_probability(s.x)) ? 1 : 0;
    s.a = rng.bernoulli(model.true_propensity(s.x, s.u)) ? 1 : 0;
    const double noise = config.noise_sd * rng.normal();
    s.y0 = model.outcome_base(s.x, 0) + config.beta_u * s.u + noise;
    s.y1 = model.outcome_base(s.x, 1) + config.beta_u * s.u + noise;
    s.y = s.a == 1 ? s.y1 : s.y0;
  }
  return out;
}

Dataset to_dataset(const std::vector<PotentialSample>& samples) {
  std::vector<Observation> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(Observation{s.x, s.a, s.y});
  return validate_dataset(std::move(rows), 2);
}

// --------------------------------------------------------------- DgpOracle

DgpOracle::DgpOracle(DgpConfig config)
    : model_(config),
      offset_law_{NormalMixture({1.0 - model_.latent_given_arm(0), model_.latent_given_arm(0)},
                                {0.0, config.beta_u}, config.noise_sd),
                  NormalMixture({1.0 - model_.latent_given_arm(1), model_.latent_given_arm(1)},
                                {0.0, config.beta_u}, config.noise_sd)} {}

std::vector<double> DgpOracle::propensity(std::span<const double> x) const {
  const double e = model_.propensity(x);
  return {1.0 - e, e};
}

double DgpOracle::quantile_offset(int arm, double level) const {
  const auto key = std::make_pair(arm, level);
  {
    std::lock_guard lock(cache_mutex_);
    const auto it = offset_cache_.find(key);
    if (it != offset_cache_.end()) return it->second;
  }
  const double q = offset_law_.at(static_cast<std::size_t>(arm)).quantile(level);
  std::lock_guard lock(cache_mutex_);
  offset_cache_.emplace(key, q);
  return q;
}

double DgpOracle::quantile(std::span<const double> x, int arm, double level) const {
  return model_.outcome_base(x, arm) + quantile_offset(arm, level);
}

double DgpOracle::mean_below(std::span<const double> x, int arm, double c) const {
  const double base = model_.outcome_base(x, arm);
  const auto& law = offset_law_.at(static_cast<std::size_t>(arm));
  return base * law.cdf(c - base) + law.mean_below(c - base);
}

double DgpOracle::mean_above(std::span<const double> x, int arm, double c) const {
  const double base = model_.outcome_base(x, arm);
  const auto& law = offset_law_.at(static_cast<std::size_t>(arm));
  return base * (1.0 - law.cdf(c - base)) + law.mean_above(c - base);
}

double DgpOracle::mu_bound(std::span<const double> x, int arm, const SensitivityParam& lambda,
                           BoundSide side) const {
  const double e1 = model_.propensity(x);
  const double e = arm == 1 ? e1 : 1.0 - e1;
  const double level = side == BoundSide::kLower ? lambda.lower_level() : lambda.upper_level();
  const double q = quantile(x, arm, level);
  return mu_bound_from_nuisance(e, mean_below(x, arm, q), mean_above(x, arm, q), lambda, side);
}

// -------------------------------------------------------------- evaluation

OracleBounds oracle_bounds(const DgpOracle& oracle, const std::vector<PotentialSample>& sample,
                           const SensitivityParam& lambda, int threads) {
  OracleBounds b;
  b.log_lambda = lambda.log_value();
  const std::size_t n = sample.size();
  b.mu_lower_1.resize(n);
  b.mu_lower_0.resize(n);
  b.tau_lower.resize(n);
  // Warm the quantile cache before going parallel.
  for (int a = 0; a < 2; ++a) {
    oracle.quantile(std::vector<double>{0.0, 0.0}, a, lambda.lower_level());
    oracle.quantile(std::vector<double>{0.0, 0.0}, a, lambda.upper_level());
  }
  const std::size_t chunk = 4096;
  parallel_for((n + chunk - 1) / chunk, threads, [&](std::size_t c) {
    for (std::size_t i = c * chunk; i < std::min(n, (c + 1) * chunk); ++i) {
      const auto& x = sample[i].x;
      b.mu_lower_1[i] = oracle.mu_bound(x, 1, lambda, BoundSide::kLower);
      b.mu_lower_0[i] = oracle.mu_bound(x, 0, lambda, BoundSide::kLower);
      b.tau_lower[i] = b.mu_lower_1[i] - oracle.mu_bound(x, 0, lambda, BoundSide::kUpper);
    }
  });
  return b;
}

EvalMetrics evaluate_policy(const Policy& policy, const std::vector<PotentialSample>& sample,
                            const OracleBounds& bounds) {
  if (bounds.mu_lower_1.size() != sample.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "bounds and evaluation sample differ in size");
  }
  EvalMetrics m;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double p = policy.treat_probability(sample[i].x);
    m.treated_fraction += p;
    m.expected_welfare += p * sample[i].y1 + (1.0 - p) * sample[i].y0;
    m.worst_welfare += p * bounds.mu_lower_1[i] + (1.0 - p) * bounds.mu_lower_0[i];
    m.worst_improvement += p * bounds.tau_lower[i];
  }
  const double n = static_cast<double>(sample.size());
  m.treated_fraction /= n;
  m.expected_welfare /= n;
  m.worst_welfare /= n;
  m.worst_improvement /= n;
  return m;
}

ClassOptimum class_optimum(const PolicyClassSpec& cls, const std::vector<PotentialSample>& sample,
                           const OracleBounds& bounds, std::uint64_t seed, int threads) {
  const std::size_t n = sample.size();
  if (n == 0) throw Error(ErrorCode::kEmptyData, "empty evaluation sample");
  CovariateRows x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = sample[i].x;
  const auto features = policy_features(cls, x[0].size());
  std::vector<double> gain_w(n);
  for (std::size_t i = 0; i < n; ++i) gain_w[i] = bounds.mu_lower_1[i] - bounds.mu_lower_0[i];
  const double base_w = mean(bounds.mu_lower_0);
  const double nn = static_cast<double>(n);
  ClassOptimum out;
  switch (cls.cls) {
    case PolicyClass::kQuadrant: {
      if (features.size() != 2) throw Error(ErrorCode::kNeedTwoFeatures, "quadrant class needs two features");
      out.worst_welfare = base_w + quadrant_search(gain_w, x, features[0], features[1]).objective / nn;
      out.worst_improvement = quadrant_search(bounds.tau_lower, x, features[0], features[1]).objective / nn;
      break;
    }
    case PolicyClass::kTree: {
      if (n > 5000) {
        throw Error(ErrorCode::kUnsupportedClass, "exact tree optimum is limited to 5000 evaluation units");
      }
      std::vector<double> gw(2 * n);
      std::vector<double> gd(2 * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        gw[2 * i] = bounds.mu_lower_0[i];
        gw[2 * i + 1] = bounds.mu_lower_1[i];
        gd[2 * i + 1] = bounds.tau_lower[i];
      }
      out.worst_welfare = tree_search(gw, 2, x, features, cls.depth).objective / nn;
      out.worst_improvement = tree_search(gd, 2, x, features, cls.depth).objective / nn;
      break;
    }
    case PolicyClass::kLogistic: {
      LogisticSearchOptions options;
      options.restarts = cls.restarts;
      options.max_iter = cls.max_iter;
      options.seed = seed;
      options.threads = threads;
      out.worst_welfare = base_w + logistic_ascent(gain_w, x, features, cls.basis, options).objective;
      out.worst_improvement = logistic_ascent(bounds.tau_lower, x, features, cls.basis, options).objective;
      out.exact = false;
      break;
    }
  }
  return out;
}

Regret estimate_regret(const EvalMetrics& metrics, const ClassOptimum& optimum) {
  Regret r;
  r.exact = optimum.exact;
  r.crw = optimum.worst_welfare - metrics.worst_welfare;
  r.cri = optimum.worst_improvement - metrics.worst_improvement;
  if (!optimum.exact) {
    r.crw = std::max(0.0, r.crw);
    r.cri = std::max(0.0, r.cri);
  }
  return r;
}

namespace {

// Axis-aligned cut points of the rule on covariate `axis`.
std::vector<double> policy_cuts(const Policy& policy, std::size_t axis) {
  std::vector<double> cuts;
  if (const auto* q = std::get_if<QuadrantPolicy>(&policy.rule())) {
    if (q->i == axis && std::isfinite(q->t1)) cuts.push_back(q->t1);
    if (q->j == axis && std::isfinite(q->t2)) cuts.push_back(q->t2);
  } else if (const auto* t = std::get_if<TreePolicy>(&policy.rule())) {
    for (const auto& node : t->nodes) {
      if (!node.is_leaf() && static_cast<std::size_t>(node.feature) == axis) cuts.push_back(node.threshold);
    }
  }
  return cuts;
}

}  // namespace

IntegratedCriteria integrate_criteria(const DgpOracle& oracle, const Policy& policy, const SensitivityParam& lambda,
                                      int nodes) {
  if (nodes < 1) throw Error(ErrorCode::kBadConfig, "need at least one quadrature node");
  constexpr double kHalfWidth = 10.0;
  const auto& cfg = oracle.model().config();
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(nodes));
  if (table == nullptr) throw Error(ErrorCode::kInfeasible, "quadrature allocation failed");
  std::array<std::vector<double>, 2> pts;
  std::array<std::vector<double>, 2> wts;
  for (std::size_t axis = 0; axis < 2; ++axis) {
    const double mu = cfg.mu_x[axis];
    std::vector<double> edges{mu - kHalfWidth, mu + kHalfWidth};
    if (axis == 0) edges.push_back(0.0);  // kink of max(x1, 0) in the propensity
    for (double c : policy_cuts(policy, axis)) {
      if (c > edges.front() && c < edges.back()) edges.push_back(c);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (std::size_t piece = 0; piece + 1 < edges.size(); ++piece) {
      for (std::size_t k = 0; k < static_cast<std::size_t>(nodes); ++k) {
        double xk = 0.0, wk = 0.0;
        gsl_integration_glfixed_point(edges[piece], edges[piece + 1], k, &xk, &wk, table);
        const double z = xk - mu;
        pts[axis].push_back(xk);
        wts[axis].push_back(wk * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi));
      }
    }
  }
  gsl_integration_glfixed_table_free(table);
  IntegratedCriteria out;
  std::vector<double> x(2);
  for (std::size_t a = 0; a < pts[0].size(); ++a) {
    for (std::size_t b = 0; b < pts[1].size(); ++b) {
      const double w = wts[0][a] * wts[1][b];
      // Far tail nodes carry no mass but can saturate the propensity to 0 or 1.
      if (w < 1e-20) continue;
      x[0] = pts[0][a];
      x[1] = pts[1][b];
      const double p = policy.treat_probability(x);
      const double lo1 = oracle.mu_bound(x, 1, lambda, BoundSide::kLower);
      const double lo0 = oracle.mu_bound(x, 0, lambda, BoundSide::kLower);
      const double hi0 = oracle.mu_bound(x, 0, lambda, BoundSide::kUpper);
      out.worst_welfare += w * (p * lo1 + (1.0 - p) * lo0);
      out.worst_improvement += w * p * (lo1 - hi0);
    }
  }
  return out;
}

// ------------------------------------------------------------------- sweep

std::string_view to_string(SweepMethod method) {
  switch (method) {
    case SweepMethod::kAw: return "AW";
    case SweepMethod::kMmw: return "MMW";
    case SweepMethod::kMmi: return "MMI";
  }
  return "unknown";
}

SweepMethod sweep_method_from_string(std::string_view name) {
  if (name == "AW" || name == "aw") return SweepMethod::kAw;
  if (name == "MMW" || name == "mmw") return SweepMethod::kMmw;
  if (name == "MMI" || name == "mmi") return SweepMethod::kMmi;
  throw Error(ErrorCode::kBadConfig, "unknown sweep method '" + std::string(name) + "'");
}

namespace {

constexpr std::uint64_t kEvalStream = std::numeric_limits<std::uint64_t>::max();

bool has_method(const SweepConfig& c, SweepMethod m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, const std::function<void(int)>& on_rep_done) {
  if (config.log_lambda_grid.empty()) throw Error(ErrorCode::kBadConfig, "sensitivity grid is empty");
  if (config.methods.empty()) throw Error(ErrorCode::kBadConfig, "no methods selected");
  if (config.reps < 1 || config.n < 2 || config.eval_n < 1) {
    throw Error(ErrorCode::kBadConfig, "reps, n and eval_n must be positive");
  }
  config.dgp.validate();
  auto oracle = std::make_shared<const DgpOracle>(config.dgp);
  NuisanceSpec base_spec = config.nuisance;
  if (base_spec.learner == LearnerKind::kOracle) base_spec.oracle = oracle;
  base_spec.validate(2);

  const auto eval_sample = generate(config.dgp, config.eval_n, mix_seed(config.seed, kEvalStream));
  const std::size_t grid = config.log_lambda_grid.size();
  std::vector<OracleBounds> bounds;
  std::vector<ClassOptimum> optimum(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    bounds.push_back(oracle_bounds(*oracle, eval_sample, SensitivityParam::from_log(config.log_lambda_grid[g]),
                                   config.threads));
  }
  PolicyClassSpec regret_cls = config.policy;
  regret_cls.restarts = config.regret_restarts;
  regret_cls.max_iter = config.regret_max_iter;
  parallel_for(grid, config.threads, [&](std::size_t g) {
    optimum[g] = class_optimum(regret_cls, eval_sample, bounds[g], mix_seed(config.seed, kEvalStream - 1), 1);
  });

  const bool want_aw = has_method(config, SweepMethod::kAw);
  const bool want_mmw = has_method(config, SweepMethod::kMmw);
  const bool want_mmi = has_method(config, SweepMethod::kMmi);
  std::vector<std::vector<SweepRow>> per_rep(static_cast<std::size_t>(config.reps));

  parallel_for(per_rep.size(), config.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = mix_seed(config.seed, r);
    const Dataset data = to_dataset(generate(config.dgp, config.n, mix_seed(rep_seed, 0)));
    const std::uint64_t learn_seed = mix_seed(rep_seed, 1);
    const std::uint64_t search_seed = mix_seed(learn_seed, 1);
    NuisanceSpec spec = base_spec;
    spec.threads = 1;
    const auto folds = learning_folds(data.n(), spec.folds, learn_seed);
    const auto propensities = fit_crossfit_propensity(data, folds, spec);

    std::vector<SweepRow>& rows = per_rep[r];
    auto record = [&](std::size_t g, SweepMethod method, const Policy& policy) {
      SweepRow row;
      row.log_lambda = config.log_lambda_grid[g];
      row.rep = static_cast<int>(r);
      row.method = method;
      row.metrics = evaluate_policy(policy, eval_sample, bounds[g]);
      row.regret = estimate_regret(row.metrics, optimum[g]);
      rows.push_back(row);
    };

    std::optional<Policy> aw;
    if (want_aw) {
      const auto fitted = fit_scores(data, spec, SensitivityParam(1.0), false, learn_seed, propensities);
      aw = optimize_policy(fitted.table, Method::kMmw, config.policy, search_seed).policy;
    }
    for (std::size_t g = 0; g < grid; ++g) {
      if (aw) record(g, SweepMethod::kAw, *aw);
      if (!want_mmw && !want_mmi) continue;
      const SensitivityParam lambda = SensitivityParam::from_log(config.log_lambda_grid[g]);
      const auto fitted = fit_scores(data, spec, lambda, want_mmi, learn_seed, propensities);
      if (want_mmw) record(g, SweepMethod::kMmw, optimize_policy(fitted.table, Method::kMmw, config.policy,
                                                                 search_seed).policy);
      if (want_mmi) record(g, SweepMethod::kMmi, optimize_policy(fitted.table, Method::kMmi, config.policy,
                                                                 search_seed).policy);
    }
    if (on_rep_done) on_rep_done(static_cast<int>(r));
  });

  SweepResult result;
  for (const auto& rows : per_rep) result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.log_lambda, a.rep, a.method) < std::tie(b.log_lambda, b.rep, b.method);
  });
  result.summary = summarize(result.rows);
  return result;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  std::map<std::pair<double, SweepMethod>, std::vector<const SweepRow*>> groups;
  for (const auto& row : rows) groups[{row.log_lambda, row.method}].push_back(&row);
  std::vector<SweepSummary> out;
  for (const auto& [key, members] : groups) {
    SweepSummary s;
    s.log_lambda = key.first;
    s.method = key.second;
    s.reps = static_cast<int>(members.size());
    auto stat = [&](double EvalMetrics::*field, double& mean_out, double& sd_out) {
      std::vector<double> v;
      v.reserve(members.size());
      for (const auto* row : members) v.push_back(row->metrics.*field);
      mean_out = mean(v);
      sd_out = sample_sd(v);
    };
    stat(&EvalMetrics::treated_fraction, s.mean.treated_fraction, s.sd.treated_fraction);
    stat(&EvalMetrics::expected_welfare, s.mean.expected_welfare, s.sd.expected_welfare);
    stat(&EvalMetrics::worst_welfare, s.mean.worst_welfare, s.sd.worst_welfare);
    stat(&EvalMetrics::worst_improvement, s.mean.worst_improvement, s.sd.worst_improvement);
    out.push_back(s);
  }
  return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "log_lambda,rep,method,treated_frac,exp_welfare,worst_welfare,worst_improvement,crw_regret,cri_regret\n";
  for (const auto& r : rows) {
    out += format_double(r.log_lambda) + ',' + std::to_string(r.rep) + ',' + std::string(to_string(r.method)) + ',' +
           format_double(r.metrics.treated_fraction) + ',' + format_double(r.metrics.expected_welfare) + ',' +
           format_double(r.metrics.worst_welfare) + ',' + format_double(r.metrics.worst_improvement) + ',' +
           format_double(r.regret.crw) + ',' + format_double(r.regret.cri) + '\n';
  }
  return out;
}

}  // namespace msmpolicy
