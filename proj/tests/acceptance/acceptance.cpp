// Acceptance run: one PASS/FAIL line per criterion.
//
// usage: acceptance [--full] [--summary sweep_summary.csv] [--only 1,3,...]
//   --full     criterion 5 on the full sweep (100 reps, eval_n 100000) instead of smoke mode
//   --summary  criterion 5 on an existing sweep summary instead of running the sweep

#include <sys/wait.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "msmpolicy/bounds.hpp"
#include "msmpolicy/learn.hpp"
#include "msmpolicy/policy_search.hpp"
#include "msmpolicy/random.hpp"
#include "msmpolicy/scores.hpp"
#include "msmpolicy/selfcheck.hpp"
#include "msmpolicy/simlab.hpp"
#include "msmpolicy/stats.hpp"

using namespace msmpolicy;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kBoundTol = 2e-3;
constexpr double kBoundSeconds = 30.0;
constexpr double kExactTol = 1e-12;
constexpr double kSeMultiple = 3.0;
constexpr double kOrthoSlopeMin = 1.9;
constexpr double kPlugInSlopeMax = 1.2;
constexpr double kAwShare = 0.95;
constexpr double kAwShareTol = 0.05;
constexpr double kMonotoneSlack = 0.02;
constexpr double kMmiHighLambdaShare = 0.10;
constexpr double kBand = 1.96;
constexpr double kCrossLo = 1.0;
constexpr double kCrossHi = 2.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1

FiniteConditionalLaw discretize(const std::function<double(double)>& quantile, double e, std::size_t atoms = 2000) {
  std::vector<Atom> a;
  for (std::size_t j = 0; j < atoms; ++j) a.push_back({quantile((j + 0.5) / atoms), 1.0 / atoms});
  return FiniteConditionalLaw(1, e, a);
}

struct ContinuousLaw {
  std::function<double(double)> quantile;
  std::function<double(double)> mean_below;  // E[Y 1{Y < c}]
  double mean = 0.0;
};

// Closed form on the continuous law: the weight 1 + r*Lambda (or 1 + r/Lambda)
// on the part below the level-1/(1+Lambda) (or Lambda/(1+Lambda)) quantile.
double continuous_bound(const ContinuousLaw& law, double e, double lam, BoundSide side) {
  const double r = (1.0 - e) / e;
  const double lo_w = 1.0 + r / lam, hi_w = 1.0 + r * lam;
  if (side == BoundSide::kLower) {
    const double below = law.mean_below(law.quantile(1.0 / (1.0 + lam)));
    return e * (hi_w * below + lo_w * (law.mean - below));
  }
  const double below = law.mean_below(law.quantile(lam / (1.0 + lam)));
  return e * (lo_w * below + hi_w * (law.mean - below));
}

ContinuousLaw mixture_law(const NormalMixture& mix) {
  return {[mix](double p) { return mix.quantile(p); }, [mix](double c) { return mix.mean_below(c); }, mix.mean()};
}

ContinuousLaw uniform_law(double lo, double width) {
  return {[=](double p) { return lo + width * p; },
          [=](double c) {
            const double t = std::clamp(c, lo, lo + width);
            return (t * t - lo * lo) / (2.0 * width);
          },
          lo + 0.5 * width};
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0, discrete = 0.0;
  for (int k = 0; k < 20; ++k) {
    ContinuousLaw law;
    if (k % 3 == 0) {
      law = mixture_law(NormalMixture({1.0}, {rng.normal(0, 2)}, rng.uniform(0.3, 3.0)));
    } else if (k % 3 == 1) {
      law = uniform_law(rng.normal(0, 2), rng.uniform(0.5, 5.0));
    } else {
      const double w = rng.uniform(0.2, 0.8);
      law = mixture_law(NormalMixture({w, 1.0 - w}, {rng.normal(-1, 1), rng.normal(2, 1)}, rng.uniform(0.3, 1.5)));
    }
    const double e = rng.uniform(0.2, 0.8);
    const auto atoms = discretize(law.quantile, e);
    for (double lam : {1.0, 1.5, 2.0, 4.482}) {
      const SensitivityParam lambda(lam);
      const double hi = sharp_bound_finite(atoms, lambda, Direction::kMax).value;
      const double lo = sharp_bound_finite(atoms, lambda, Direction::kMin).value;
      worst = std::max(worst, std::abs(continuous_bound(law, e, lam, BoundSide::kUpper) - hi));
      worst = std::max(worst, std::abs(continuous_bound(law, e, lam, BoundSide::kLower) - lo));
      discrete = std::max(discrete, std::abs(closed_form_bound(atoms, lambda, BoundSide::kUpper) - hi));
      discrete = std::max(discrete, std::abs(closed_form_bound(atoms, lambda, BoundSide::kLower) - lo));
    }
  }
  const auto unif = discretize([](double p) { return p; }, 0.5);
  const SensitivityParam two(2.0);
  double anchor = 0.0;
  anchor = std::max(anchor, std::abs(continuous_bound(uniform_law(0.0, 1.0), 0.5, 2.0, BoundSide::kUpper) - 7.0 / 12.0));
  anchor = std::max(anchor, std::abs(continuous_bound(uniform_law(0.0, 1.0), 0.5, 2.0, BoundSide::kLower) - 5.0 / 12.0));
  anchor = std::max(anchor, std::abs(closed_form_bound(unif, two, BoundSide::kUpper) - 7.0 / 12.0));
  anchor = std::max(anchor, std::abs(closed_form_bound(unif, two, BoundSide::kLower) - 5.0 / 12.0));
  anchor = std::max(anchor, std::abs(sharp_bound_finite(unif, two, Direction::kMax).value - 7.0 / 12.0));
  anchor = std::max(anchor, std::abs(sharp_bound_finite(unif, two, Direction::kMin).value - 5.0 / 12.0));
  const double secs = seconds_since(t0);
  return {worst <= kBoundTol && anchor <= kBoundTol && secs < kBoundSeconds,
          "max |closed form - LP| = " + fmt(worst) + " (closed form on the atoms themselves: " + fmt(discrete) +
              "), uniform anchor dev " + fmt(anchor) + ", " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion2() {
  Rng rng(202);
  const SensitivityParam one(1.0);
  double bound_dev = 0.0, score_dev = 0.0;
  for (int k = 0; k < 200; ++k) {
    std::vector<Atom> atoms;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t j = 0; j < n; ++j) atoms.push_back({rng.normal(0, 2), 1.0 / n});
    const FiniteConditionalLaw law(1, rng.uniform(0.05, 0.95), atoms);
    bound_dev = std::max(bound_dev, std::abs(sharp_bound_finite(law, one, Direction::kMax).value -
                                             sharp_bound_finite(law, one, Direction::kMin).value));
    const double y = rng.normal(), e = rng.uniform(0.05, 0.95), q = rng.normal();
    const double rb = rng.normal(), ra = rng.normal();
    const int a = static_cast<int>(rng.below(2));
    const double m = rb + ra;
    const double aipw = m + (a == 1 ? (y - m) / e : 0.0);
    score_dev = std::max(score_dev, std::abs(phi_minus(y, a, 1, e, q, rb, ra, one) - aipw));
    score_dev = std::max(score_dev, std::abs(phi_plus(y, a, 1, e, q, rb, ra, one) - aipw));
  }

  const DgpConfig dgp;
  const auto data = to_dataset(generate(dgp, 1000, 7));
  NuisanceSpec spec;
  spec.folds = 5;
  spec.gbt.trees = 50;
  const auto fitted = fit_scores(data, spec, one, true, 7);
  double w_dev = 0.0;
  for (PolicyClass cls : {PolicyClass::kQuadrant, PolicyClass::kTree, PolicyClass::kLogistic}) {
    PolicyClassSpec pc;
    pc.cls = cls;
    pc.restarts = 3;
    pc.max_iter = 200;
    const auto w = optimize_policy(fitted.table, Method::kMmw, pc, 3);
    const auto d = optimize_policy(fitted.table, Method::kMmi, pc, 3);
    w_dev = std::max(w_dev, std::abs(estimate_W(fitted.table, w.policy).mean - estimate_W(fitted.table, d.policy).mean));
  }
  return {bound_dev <= kExactTol && score_dev <= kExactTol && w_dev <= kExactTol,
          "|mu+ - mu-| " + fmt(bound_dev) + ", |phi - AIPW| " + fmt(score_dev) + ", |W(MMW) - W(MMI)| " + fmt(w_dev)};
}

// ---------------------------------------------------------------- criterion 3

// Finite law: two covariate values, four outcome atoms per arm; the CDF
// reaches the quantile levels at 1/3 and 2/3 between atoms.
constexpr std::array<double, 2> kMassX{0.4, 0.6};
constexpr std::array<double, 2> kE1{0.35, 0.6};
constexpr std::array<double, 4> kMass{1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0};
const std::array<std::array<std::array<double, 4>, 2>, 2> kSupport{{
    {{{-1.0, 0.5, 1.2, 2.0}, {0.2, 1.1, 1.9, 3.0}}},
    {{{-0.3, 0.4, 0.9, 1.7}, {0.0, 1.5, 2.1, 2.5}}},
}};

double arm_e(std::size_t x, int a) { return a == 1 ? kE1[x] : 1.0 - kE1[x]; }

FiniteConditionalLaw finite_law(std::size_t x, int a) {
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < 4; ++j) atoms.push_back({kSupport[x][static_cast<std::size_t>(a)][j], kMass[j]});
  return FiniteConditionalLaw(a, arm_e(x, a), atoms);
}

Outcome criterion3() {
  const SensitivityParam two(2.0);
  constexpr std::array<double, 2> treat{0.3, 0.8};
  double w_truth = 0.0, d_truth = 0.0, w_mean = 0.0, d_mean = 0.0;
  for (std::size_t x = 0; x < 2; ++x) {
    const double lo1 = sharp_bound_finite(finite_law(x, 1), two, Direction::kMin).value;
    const double lo0 = sharp_bound_finite(finite_law(x, 0), two, Direction::kMin).value;
    const double hi0 = sharp_bound_finite(finite_law(x, 0), two, Direction::kMax).value;
    w_truth += kMassX[x] * (treat[x] * lo1 + (1.0 - treat[x]) * lo0);
    d_truth += kMassX[x] * treat[x] * (lo1 - hi0);
    for (int a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < 4; ++j) {
        const double p = kMassX[x] * arm_e(x, a) * kMass[j];
        const double y = kSupport[x][static_cast<std::size_t>(a)][j];
        double phi_m[2], phi_p[2];
        for (int t = 0; t < 2; ++t) {
          const auto& ys = kSupport[x][static_cast<std::size_t>(t)];
          const auto law = finite_law(x, t);
          const double q_lo = 0.5 * (ys[1] + ys[2]), q_hi = 0.5 * (ys[2] + ys[3]);
          phi_m[t] = phi_minus(y, a, t, arm_e(x, t), q_lo, law.mean_below(q_lo), law.mean_above(q_lo), two);
          phi_p[t] = phi_plus(y, a, t, arm_e(x, t), q_hi, law.mean_below(q_hi), law.mean_above(q_hi), two);
        }
        const std::vector<double> probs{1.0 - treat[x], treat[x]};
        w_mean += p * psi_w(std::vector<double>{phi_m[0], phi_m[1]}, probs);
        d_mean += p * psi_delta(phi_m[1], phi_p[0], treat[x]);
      }
    }
  }
  const double finite_dev = std::max(std::abs(w_mean - w_truth), std::abs(d_mean - d_truth));

  const DgpConfig dgp;
  const auto oracle = std::make_shared<DgpOracle>(dgp);
  const SensitivityParam lambda(std::exp(1.0));
  const Policy pi(QuadrantPolicy{0, 1, 1, 1, -1.0, 0.5}, 2);
  const auto truth = integrate_criteria(*oracle, pi, lambda);
  const auto data = to_dataset(generate(dgp, 100000, 303));
  NuisanceSpec spec;
  spec.learner = LearnerKind::kOracle;
  spec.oracle = oracle;
  const auto table = fit_scores(data, spec, lambda, true, 303).table;
  const auto w = estimate_W(table, pi);
  const auto d = estimate_Delta(table, pi);
  const double zw = std::abs(w.mean - truth.worst_welfare) / w.se;
  const double zd = std::abs(d.mean - truth.worst_improvement) / d.se;
  return {finite_dev <= kExactTol && zw <= kSeMultiple && zd <= kSeMultiple,
          "finite-law dev " + fmt(finite_dev) + "; simulated psi_W " + fmt(w.mean, 6) + " vs " +
              fmt(truth.worst_welfare, 6) + " (" + fmt(zw, 3) + " SE), psi_Delta " + fmt(d.mean, 6) + " vs " +
              fmt(truth.worst_improvement, 6) + " (" + fmt(zd, 3) + " SE)"};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion4() {
  const auto results = run_selfcheck();
  int checks = 0, failed = 0, exact_zero = 0;
  double min_ortho = INFINITY, max_plugin = -INFINITY;
  for (const auto& r : results) {
    if (r.suite != "orthogonality") continue;
    ++checks;
    if (!r.passed) ++failed;
    const auto pos = r.detail.find("slope ");
    const bool orth = r.name.find(" orthogonal") != std::string::npos;
    if (pos == std::string::npos) {
      if (orth) ++exact_zero;
      continue;
    }
    const double slope = std::stod(r.detail.substr(pos + 6));
    if (orth) {
      min_ortho = std::min(min_ortho, slope);
    } else {
      max_plugin = std::max(max_plugin, slope);
    }
  }
  return {checks > 0 && failed == 0,
          std::to_string(checks) + " probes, min orthogonal slope " + fmt(min_ortho, 3) + " (>= " +
              fmt(kOrthoSlopeMin) + ", " + std::to_string(exact_zero) + " with zero bias), max plug-in slope " +
              fmt(max_plugin, 3) + " (<= " + fmt(kPlugInSlopeMax) + ")"};
}

// ---------------------------------------------------------------- criterion 5

std::vector<SweepSummary> read_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<SweepSummary> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> c;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (c.size() < 11) continue;
    SweepSummary s;
    s.log_lambda = std::stod(c[0]);
    s.method = sweep_method_from_string(c[1]);
    s.reps = std::stoi(c[2]);
    s.mean.treated_fraction = std::stod(c[3]);
    s.sd.treated_fraction = std::stod(c[4]);
    s.mean.expected_welfare = std::stod(c[5]);
    s.sd.expected_welfare = std::stod(c[6]);
    s.mean.worst_welfare = std::stod(c[7]);
    s.sd.worst_welfare = std::stod(c[8]);
    s.mean.worst_improvement = std::stod(c[9]);
    s.sd.worst_improvement = std::stod(c[10]);
    out.push_back(s);
  }
  return out;
}

Outcome criterion5(bool full, const std::string& summary_file) {
  std::vector<SweepSummary> summary;
  std::string how;
  if (!summary_file.empty()) {
    summary = read_summary(summary_file);
    how = "from " + summary_file;
  } else {
    cli::Flags flags;
    flags.smoke = !full;
    const fs::path cfg = fs::path(MSMPOLICY_SOURCE_DIR) / "configs" / "sweep.json";
    const auto rc = cli::make_run_config("sweep", cli::read_config_file(cfg), cfg.parent_path(), flags);
    const auto t0 = std::chrono::steady_clock::now();
    summary = run_sweep(rc.sweep).summary;
    how = std::to_string(rc.sweep.reps) + " reps, eval_n " + std::to_string(rc.sweep.eval_n) + ", " +
          fmt(seconds_since(t0), 4) + " s";
  }
  std::map<double, std::map<SweepMethod, SweepSummary>> grid;
  for (const auto& s : summary) grid[s.log_lambda][s.method] = s;

  double aw_lo = INFINITY, aw_hi = -INFINITY, worst_step = -INFINITY, high_mmi = 0.0;
  bool c_ok = true, d_ok = true;
  std::string c_fail, d_fail;
  double prev_tf = NAN;
  std::vector<std::pair<double, double>> ew_gap;
  for (const auto& [ll, row] : grid) {
    const auto& aw = row.at(SweepMethod::kAw);
    const auto& mmw = row.at(SweepMethod::kMmw);
    const auto& mmi = row.at(SweepMethod::kMmi);
    aw_lo = std::min(aw_lo, aw.mean.treated_fraction);
    aw_hi = std::max(aw_hi, aw.mean.treated_fraction);
    if (!std::isnan(prev_tf)) worst_step = std::max(worst_step, mmi.mean.treated_fraction - prev_tf);
    prev_tf = mmi.mean.treated_fraction;
    if (ll >= 2.5 - 1e-9) high_mmi = std::max(high_mmi, mmi.mean.treated_fraction);
    const double ww_top = mmw.mean.worst_welfare + kBand * mmw.sd.worst_welfare;
    if (ww_top < mmi.mean.worst_welfare || ww_top < aw.mean.worst_welfare) {
      c_ok = false;
      c_fail += " " + fmt(ll, 2);
    }
    const double wi_top = mmi.mean.worst_improvement + kBand * mmi.sd.worst_improvement;
    if (wi_top < mmw.mean.worst_improvement || wi_top < aw.mean.worst_improvement) {
      d_ok = false;
      d_fail += " " + fmt(ll, 2);
    }
    ew_gap.emplace_back(ll, mmi.mean.expected_welfare - mmw.mean.expected_welfare);
  }
  const bool a_ok = aw_lo >= kAwShare - kAwShareTol && aw_hi <= kAwShare + kAwShareTol;
  const bool b_ok = worst_step <= kMonotoneSlack && high_mmi < kMmiHighLambdaShare;
  // Last change of sign from MMI ahead to MMW ahead, linearly interpolated.
  double cross = NAN;
  for (std::size_t k = 0; k + 1 < ew_gap.size(); ++k) {
    const auto [x0, y0] = ew_gap[k];
    const auto [x1, y1] = ew_gap[k + 1];
    if (y0 > 0.0 && y1 < 0.0) cross = x0 + (x1 - x0) * y0 / (y0 - y1);
  }
  const bool e_ok = !std::isnan(cross) && cross >= kCrossLo && cross <= kCrossHi;
  std::string detail = how + "; (a) AW share " + fmt(aw_lo, 3) + ".." + fmt(aw_hi, 3) + (a_ok ? " ok" : " FAIL") +
                       "; (b) largest MMI step " + fmt(worst_step, 3) + ", max share at log L >= 2.5 " +
                       fmt(high_mmi, 3) + (b_ok ? " ok" : " FAIL") + "; (c) MMW worst welfare" +
                       (c_ok ? " ok" : " FAIL at" + c_fail) + "; (d) MMI worst improvement" +
                       (d_ok ? " ok" : " FAIL at" + d_fail) + "; (e) expected-welfare crossing at log L " +
                       fmt(cross, 3) + (e_ok ? " ok" : " FAIL");
  return {a_ok && b_ok && c_ok && d_ok && e_ok, detail};
}

// ---------------------------------------------------------------- criterion 6

std::vector<double> thresholds(const CovariateRows& x, std::size_t f, bool with_inf) {
  std::set<double> values;
  for (const auto& row : x) values.insert(row[f]);
  const std::vector<double> v(values.begin(), values.end());
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) out.push_back(0.5 * (v[k] + v[k + 1]));
  if (with_inf) {
    out.push_back(-INFINITY);
    out.push_back(INFINITY);
  }
  return out;
}

double brute_quadrant(const std::vector<double>& g, const CovariateRows& x) {
  double best = 0.0;
  for (int s1 : {-1, 1}) {
    for (int s2 : {-1, 1}) {
      for (double t1 : thresholds(x, 0, true)) {
        for (double t2 : thresholds(x, 1, true)) {
          const QuadrantPolicy q{0, 1, s1, s2, t1, t2};
          double sum = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) sum += q.treats(x[i]) ? g[i] : 0.0;
          best = std::max(best, sum);
        }
      }
    }
  }
  return best;
}

double brute_tree(const std::vector<double>& gamma, int m, const CovariateRows& x, int depth,
                  const std::vector<std::size_t>& units) {
  double best = -INFINITY;
  for (int a = 0; a < m; ++a) {
    double sum = 0.0;
    for (auto i : units) sum += gamma[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(a)];
    best = std::max(best, sum);
  }
  if (depth == 0) return best;
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    for (double t : thresholds(x, f, false)) {
      std::vector<std::size_t> left, right;
      for (auto i : units) (x[i][f] <= t ? left : right).push_back(i);
      best = std::max(best, brute_tree(gamma, m, x, depth - 1, left) + brute_tree(gamma, m, x, depth - 1, right));
    }
  }
  return best;
}

Outcome criterion6() {
  // Integer gains make every summation order exact.
  Rng rng(606);
  int mismatches = 0;
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = 10 + rng.below(51);
    CovariateRows x(n, std::vector<double>(3));
    for (auto& row : x) {
      for (auto& v : row) v = k % 2 == 0 ? static_cast<double>(rng.below(6)) : std::round(rng.normal() * 100) / 100;
    }
    std::vector<double> g(n);
    for (auto& v : g) v = static_cast<double>(static_cast<int>(rng.below(41)) - 18);
    if (quadrant_search(g, x, 0, 1).objective != brute_quadrant(g, x)) ++mismatches;

    const int m = 2 + static_cast<int>(rng.below(2));
    std::vector<double> gamma(n * static_cast<std::size_t>(m));
    for (auto& v : gamma) v = static_cast<double>(static_cast<int>(rng.below(21)) - 10);
    const std::vector<std::size_t> features{0, 1, 2};
    std::vector<std::size_t> units(n);
    for (std::size_t i = 0; i < n; ++i) units[i] = i;
    if (tree_search(gamma, m, x, features, 2).objective != brute_tree(gamma, m, x, 2, units)) ++mismatches;
  }
  return {mismatches == 0, "30 quadrant + 30 depth-2 tree instances, " + std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path cfg = fs::path(MSMPOLICY_SOURCE_DIR) / "configs" / "sweep.json";
  const auto rc = cli::make_run_config("sweep", cli::read_config_file(cfg), cfg.parent_path(), cli::Flags{});
  const DgpConfig dgp = rc.sweep.dgp;
  const SensitivityParam lambda(std::exp(1.0));
  const DgpOracle oracle(dgp);
  const auto eval = generate(dgp, 100000, 7007);
  const auto bounds = oracle_bounds(oracle, eval, lambda);
  PolicyClassSpec cls;
  cls.cls = PolicyClass::kQuadrant;
  const auto optimum = class_optimum(cls, eval, bounds, 0);

  std::vector<double> medians;
  std::string detail;
  for (std::size_t n : {500u, 2000u, 8000u}) {
    std::vector<double> regrets;
    for (int r = 0; r < 20; ++r) {
      const std::uint64_t seed = mix_seed(707, static_cast<std::uint64_t>(n) * 1000 + r);
      const auto data = to_dataset(generate(dgp, n, seed));
      const auto learned = learn_mmw(data, rc.sweep.nuisance, lambda, cls, seed);
      regrets.push_back(estimate_regret(evaluate_policy(learned.policy, eval, bounds), optimum).crw);
    }
    std::sort(regrets.begin(), regrets.end());
    medians.push_back(0.5 * (regrets[9] + regrets[10]));
    detail += (detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + ": " + fmt(medians.back());
  }
  const bool ok = medians[0] > medians[1] && medians[1] > medians[2];
  return {ok, "median CRW regret " + detail + ", " + fmt(seconds_since(t0), 4) + " s"};
}

// ---------------------------------------------------------------- criterion 8

int run_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MSMPOLICY_BIN) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

Outcome criterion8() {
  const fs::path src = MSMPOLICY_SOURCE_DIR;
  const fs::path out = fs::temp_directory_path() / ("msmpolicy_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(out);
  fs::create_directories(out / "jtpa");
  fs::create_directories(out / "head_start");
  std::string detail;
  bool ok = true;

  const int jtpa = run_binary("fit --config " + (src / "configs/jtpa_quadrant.json").string() + " --out-dir " +
                                  (out / "jtpa").string(),
                              out / "jtpa.log");
  if (jtpa != 0) {
    ok = false;
    detail += "jtpa exit " + std::to_string(jtpa);
  } else {
    const auto r = read_json(out / "jtpa" / "fit_report.json");
    const auto p = read_json(out / "jtpa" / "policy.json");
    const auto cost = r.at("diagnostics").at("treated_cost");
    const bool good = r.at("policy_class") == "quadrant" && r.at("n") == 9223 && cost.at(1) == 1216.0 &&
                      p.at("kind") == "quadrant";
    ok = ok && good;
    detail += "jtpa quadrant n=9223 treated share " + fmt(r.at("treated_fraction").get<double>(), 3) +
              (good ? "" : " (unexpected report)");
  }
  const int hs = run_binary("fit --config " + (src / "configs/head_start_tree.json").string() + " --out-dir " +
                                (out / "head_start").string(),
                            out / "head_start.log");
  if (hs != 0) {
    ok = false;
    detail += "; head start exit " + std::to_string(hs);
  } else {
    const auto r = read_json(out / "head_start" / "fit_report.json");
    const auto pol = Policy::from_json(read_json(out / "head_start" / "policy.json"));
    const bool good = r.at("m") == 3 && r.at("n") == 3826 && pol.kind() == PolicyKind::kTree &&
                      std::get<TreePolicy>(pol.rule()).depth() <= 2;
    ok = ok && good;
    const auto shares = r.at("arm_shares");
    detail += "; head start depth-2 tree, arm shares " + fmt(shares.at(0).get<double>(), 3) + "/" +
              fmt(shares.at(1).get<double>(), 3) + "/" + fmt(shares.at(2).get<double>(), 3) +
              (good ? "" : " (unexpected report)");
  }
  fs::remove_all(out);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance"};
  bool full = false;
  std::string summary;
  std::vector<int> only;
  app.add_flag("--full", full, "criterion 5 on the full sweep");
  app.add_option("--summary", summary, "criterion 5 from an existing sweep_summary.csv");
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, [&] { return criterion5(full, summary); }},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
