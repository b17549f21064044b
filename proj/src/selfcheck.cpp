#include "msmpolicy/selfcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "msmpolicy/random.hpp"
#include "msmpolicy/scores.hpp"
#include "msmpolicy/simlab.hpp"

namespace msmpolicy {

namespace {

constexpr int kGridAtoms = 2000;

std::string fmt(double v) { return format_double(v); }

CheckResult make(std::string suite, std::string name, double deviation, double tolerance, std::string detail = {}) {
  return CheckResult{std::move(suite), std::move(name), deviation, tolerance, deviation <= tolerance,
                     std::move(detail)};
}

// Equal-mass atoms at the (j + 1/2)/N quantiles of a continuous law.
FiniteConditionalLaw grid_law(const std::function<double(double)>& inverse_cdf, double e) {
  std::vector<Atom> atoms;
  atoms.reserve(kGridAtoms);
  for (int j = 0; j < kGridAtoms; ++j) {
    atoms.push_back({inverse_cdf((j + 0.5) / kGridAtoms), 1.0 / kGridAtoms});
  }
  return FiniteConditionalLaw(1, e, std::move(atoms));
}

void closed_form_vs_lp(const SelfCheckOptions& options, std::vector<CheckResult>& out) {
  const boost::math::normal_distribution<double> normal(0.2, 0.5);
  const NormalMixture mixture({0.3, 0.7}, {-0.4, 0.3}, 0.25);
  struct Named {
    std::string name;
    FiniteConditionalLaw law;
  };
  const std::vector<Named> laws{
      {"uniform", grid_law([](double u) { return u; }, 0.5)},
      {"normal", grid_law([&](double u) { return boost::math::quantile(normal, u); }, 0.4)},
      {"mixture", grid_law([&](double u) { return mixture.quantile(u); }, 0.65)},
  };
  for (const auto& [name, law] : laws) {
    for (double l : {1.0, 1.5, 2.0, 4.482}) {
      const SensitivityParam lambda(l);
      double worst = 0.0;
      worst = std::max(worst, std::abs(closed_form_bound(law, lambda, BoundSide::kLower, options.convention) -
                                       sharp_bound_finite(law, lambda, Direction::kMin).value));
      worst = std::max(worst, std::abs(closed_form_bound(law, lambda, BoundSide::kUpper, options.convention) -
                                       sharp_bound_finite(law, lambda, Direction::kMax).value));
      out.push_back(make("closed_form_vs_lp", name + " lambda=" + fmt(l), worst, 2e-3));
    }
  }
  // Uniform[0,1], e = 1/2, lambda = 2: bounds 5/12 and 7/12.
  const SensitivityParam two(2.0);
  const double lo = closed_form_bound(laws[0].law, two, BoundSide::kLower, options.convention);
  const double hi = closed_form_bound(laws[0].law, two, BoundSide::kUpper, options.convention);
  out.push_back(make("closed_form_vs_lp", "uniform anchor 5/12, 7/12",
                     std::max(std::abs(lo - 5.0 / 12.0), std::abs(hi - 7.0 / 12.0)), 2e-3));
}

void lp_feasibility(std::vector<CheckResult>& out) {
  Rng rng(11);
  double worst_constraint = 0.0;
  double worst_nesting = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Atom> atoms(3 + rng.below(8));
    double total = 0.0;
    for (auto& a : atoms) {
      a = {rng.normal(), 0.1 + rng.uniform()};
      total += a.p;
    }
    for (auto& a : atoms) a.p /= total;
    const double e = rng.uniform(0.1, 0.9);
    FiniteConditionalLaw law(0, e, atoms);
    const double r = (1.0 - e) / e;
    double previous_min = law.mean();
    double previous_max = law.mean();
    for (double l : {1.0, 1.3, 2.0, 5.0}) {
      const SensitivityParam lambda(l);
      for (Direction dir : {Direction::kMin, Direction::kMax}) {
        const auto sol = sharp_bound_finite(law, lambda, dir);
        double balance = 0.0;
        for (std::size_t j = 0; j < law.atoms().size(); ++j) {
          const double w = sol.weights[j];
          worst_constraint = std::max({worst_constraint, (1.0 + r / l) - w, w - (1.0 + r * l)});
          balance += law.atoms()[j].p * w;
        }
        worst_constraint = std::max(worst_constraint, std::abs(balance - 1.0 / e));
        if (dir == Direction::kMin) {
          worst_nesting = std::max(worst_nesting, sol.value - previous_min);
          previous_min = sol.value;
        } else {
          worst_nesting = std::max(worst_nesting, previous_max - sol.value);
          previous_max = sol.value;
        }
      }
    }
  }
  out.push_back(make("lp_feasibility", "box and balance constraints", worst_constraint, 1e-10));
  out.push_back(make("lp_feasibility", "nested in lambda", std::max(0.0, worst_nesting), 1e-12));
}

void unconfounded_reduction(std::vector<CheckResult>& out) {
  Rng rng(5);
  const SensitivityParam one(1.0);
  double worst_bounds = 0.0;
  double worst_scores = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double y = rng.normal(0.0, 2.0);
    const int a = static_cast<int>(rng.below(2));
    const int t = static_cast<int>(rng.below(2));
    const double e = rng.uniform(0.05, 0.95);
    const double q = rng.normal();
    const double rb = rng.normal();
    const double ra = rng.normal();
    worst_bounds = std::max(worst_bounds, std::abs(mu_bound_from_nuisance(e, rb, ra, one, BoundSide::kLower) -
                                                   mu_bound_from_nuisance(e, rb, ra, one, BoundSide::kUpper)));
    const double m = rb + ra;
    const double aipw = m + (a == t ? 1.0 : 0.0) * (y - m) / e;
    worst_scores = std::max({worst_scores, std::abs(phi_minus(y, a, t, e, q, rb, ra, one) - aipw),
                             std::abs(phi_plus(y, a, t, e, q, rb, ra, one) - aipw)});
  }
  out.push_back(make("unconfounded_reduction", "mu lower = mu upper", worst_bounds, 1e-12));
  out.push_back(make("unconfounded_reduction", "phi = AIPW", worst_scores, 1e-12));
}

// Two covariate points, binary arms; outcome laws indexed [x][a].
constexpr std::array<double, 2> kMassX{0.4, 0.6};
constexpr std::array<double, 2> kPropensity1{0.35, 0.6};
constexpr std::array<double, 2> kTreat{0.3, 0.8};

double arm_propensity(std::size_t x, int a) { return a == 1 ? kPropensity1[x] : 1.0 - kPropensity1[x]; }

void moment_identity(std::vector<CheckResult>& out) {
  // Masses 1/6, 1/6, 1/3, 1/3: the CDF reaches 1/3 and 2/3 exactly at atoms,
  // so quantiles placed inside the following gaps satisfy F(q) = level with
  // no atom at q. lambda = 2.
  const SensitivityParam lambda(2.0);
  const std::array<std::array<std::array<double, 4>, 2>, 2> support{{
      {{{-1.0, 0.5, 1.2, 2.0}, {0.2, 1.1, 1.9, 3.0}}},
      {{{-0.3, 0.4, 0.9, 1.7}, {0.0, 1.5, 2.1, 2.5}}},
  }};
  const std::array<double, 4> mass{1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0};
  double w_hat = 0.0, w_true = 0.0, d_hat = 0.0, d_true = 0.0;
  for (std::size_t x = 0; x < 2; ++x) {
    std::array<double, 2> mu_lo{}, mu_hi{}, score_lo{}, score_hi{};
    for (int t = 0; t < 2; ++t) {
      const auto& ys = support[x][static_cast<std::size_t>(t)];
      std::vector<Atom> atoms;
      for (std::size_t j = 0; j < 4; ++j) atoms.push_back({ys[j], mass[j]});
      const FiniteConditionalLaw law(t, arm_propensity(x, t), atoms);
      mu_lo[t] = sharp_bound_finite(law, lambda, Direction::kMin).value;
      mu_hi[t] = sharp_bound_finite(law, lambda, Direction::kMax).value;
      const double q_lo = 0.5 * (ys[1] + ys[2]);
      const double q_hi = 0.5 * (ys[2] + ys[3]);
      const double et = arm_propensity(x, t);
      for (int a = 0; a < 2; ++a) {
        const auto& ya = support[x][static_cast<std::size_t>(a)];
        for (std::size_t j = 0; j < 4; ++j) {
          const double p = arm_propensity(x, a) * mass[j];
          score_lo[t] += p * phi_minus(ya[j], a, t, et, q_lo, law.mean_below(q_lo), law.mean_above(q_lo), lambda);
          score_hi[t] += p * phi_plus(ya[j], a, t, et, q_hi, law.mean_below(q_hi), law.mean_above(q_hi), lambda);
        }
      }
    }
    const double pi = kTreat[x];
    w_hat += kMassX[x] * (pi * score_lo[1] + (1.0 - pi) * score_lo[0]);
    w_true += kMassX[x] * (pi * mu_lo[1] + (1.0 - pi) * mu_lo[0]);
    d_hat += kMassX[x] * pi * (score_lo[1] - score_hi[0]);
    d_true += kMassX[x] * pi * (mu_lo[1] - mu_hi[0]);
  }
  out.push_back(make("moment_identity", "E psi_W = W", std::abs(w_hat - w_true), 1e-12));
  out.push_back(make("moment_identity", "E psi_Delta = Delta", std::abs(d_hat - d_true), 1e-12));
}

// Piecewise-uniform law: mass[k] spread evenly on [edge[k], edge[k+1]).
struct Histogram {
  std::array<double, 5> edge;
  std::array<double, 4> mass;

  double quantile(double level) const {
    double cum = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (cum + mass[k] >= level) return edge[k] + (level - cum) / mass[k] * (edge[k + 1] - edge[k]);
      cum += mass[k];
    }
    return edge[4];
  }
  double mean() const {
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += mass[k] * 0.5 * (edge[k] + edge[k + 1]);
    return s;
  }
  double mean_below(double c) const {
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double hi = std::min(c, edge[k + 1]);
      if (hi <= edge[k]) continue;
      s += mass[k] * (hi - edge[k]) / (edge[k + 1] - edge[k]) * 0.5 * (edge[k] + hi);
    }
    return s;
  }
  // E f(Y) for f linear on each side of `cut`: midpoint rule on every piece.
  double expect(const std::function<double(double)>& f, double cut) const {
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double width = edge[k + 1] - edge[k];
      auto piece = [&](double lo, double hi) {
        if (hi > lo) s += mass[k] * (hi - lo) / width * f(0.5 * (lo + hi));
      };
      if (cut > edge[k] && cut < edge[k + 1]) {
        piece(edge[k], cut);
        piece(cut, edge[k + 1]);
      } else {
        piece(edge[k], edge[k + 1]);
      }
    }
    return s;
  }
};

const std::array<std::array<Histogram, 2>, 2> kHistograms{{
    {{Histogram{{0.5, 1.0, 1.5, 2.5, 3.5}, {0.2, 0.3, 0.3, 0.2}},
      Histogram{{0.8, 1.6, 2.0, 2.8, 4.0}, {0.25, 0.25, 0.3, 0.2}}}},
    {{Histogram{{0.3, 0.9, 1.4, 2.2, 3.0}, {0.15, 0.35, 0.3, 0.2}},
      Histogram{{1.0, 1.5, 2.5, 3.0, 4.2}, {0.2, 0.3, 0.25, 0.25}}}},
}};

// Nuisances per [x][t] for one bound side.
struct SideNuisance {
  std::array<std::array<double, 2>, 2> q{};
  std::array<std::array<double, 2>, 2> below{};
  std::array<std::array<double, 2>, 2> above{};
};
struct Nuisance {
  std::array<double, 2> e1{};
  SideNuisance lower, upper;
};

Nuisance exact_nuisance(const SensitivityParam& lambda) {
  Nuisance n;
  for (std::size_t x = 0; x < 2; ++x) {
    n.e1[x] = kPropensity1[x];
    for (std::size_t t = 0; t < 2; ++t) {
      const auto& h = kHistograms[x][t];
      for (auto [side, level] : {std::pair{&n.lower, lambda.lower_level()}, std::pair{&n.upper, lambda.upper_level()}}) {
        const double q = h.quantile(level);
        side->q[x][t] = q;
        side->below[x][t] = h.mean_below(q);
        side->above[x][t] = h.mean() - h.mean_below(q);
      }
    }
  }
  return n;
}

enum class ScoreKind { kOrthogonal, kPlugIn, kRegression };

// E[score_t | x] under the true law with nuisances `n`.
double conditional_score(const Nuisance& n, std::size_t x, int t, BoundSide side, ScoreKind kind,
                         const SensitivityParam& lambda) {
  const SideNuisance& s = side == BoundSide::kLower ? n.lower : n.upper;
  const auto ti = static_cast<std::size_t>(t);
  const double et = t == 1 ? n.e1[x] : 1.0 - n.e1[x];
  const double q = s.q[x][ti];
  const double rb = s.below[x][ti];
  const double ra = s.above[x][ti];
  if (kind == ScoreKind::kRegression) return mu_bound_from_nuisance(et, rb, ra, lambda, side);
  double v = 0.0;
  for (int a = 0; a < 2; ++a) {
    const auto& h = kHistograms[x][static_cast<std::size_t>(a)];
    std::function<double(double)> f;
    if (kind == ScoreKind::kPlugIn) {
      f = [&](double y) { return mu_bound_pointwise(y, a, t, et, q, lambda, side); };
    } else if (side == BoundSide::kLower) {
      f = [&](double y) { return phi_minus(y, a, t, et, q, rb, ra, lambda); };
    } else {
      f = [&](double y) { return phi_plus(y, a, t, et, q, rb, ra, lambda); };
    }
    v += arm_propensity(x, a) * h.expect(f, q);
  }
  return v;
}

double expected_w(const Nuisance& n, ScoreKind kind, const SensitivityParam& lambda) {
  double s = 0.0;
  for (std::size_t x = 0; x < 2; ++x) {
    s += kMassX[x] * (kTreat[x] * conditional_score(n, x, 1, BoundSide::kLower, kind, lambda) +
                      (1.0 - kTreat[x]) * conditional_score(n, x, 0, BoundSide::kLower, kind, lambda));
  }
  return s;
}

double expected_delta(const Nuisance& n, ScoreKind kind, const SensitivityParam& lambda) {
  double s = 0.0;
  for (std::size_t x = 0; x < 2; ++x) {
    s += kMassX[x] * kTreat[x] *
         (conditional_score(n, x, 1, BoundSide::kLower, kind, lambda) -
          conditional_score(n, x, 0, BoundSide::kUpper, kind, lambda));
  }
  return s;
}

using Direction2 = std::array<std::array<double, 2>, 2>;
constexpr Direction2 kDirQ{{{0.3, -0.25}, {-0.2, 0.35}}};
constexpr Direction2 kDirBelow{{{0.2, -0.1}, {0.15, 0.1}}};
constexpr Direction2 kDirAbove{{{-0.1, 0.3}, {0.2, -0.15}}};
constexpr std::array<double, 2> kDirE{0.08, -0.1};

struct Probe {
  std::string name;
  std::function<void(Nuisance&, double)> shift;
  ScoreKind plug_in;
};

void add(Direction2& target, const Direction2& dir, double r) {
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t t = 0; t < 2; ++t) target[x][t] += r * dir[x][t];
  }
}

// Least-squares slope of log b against log r; -inf when b vanishes.
double loglog_slope(const std::vector<double>& r, const std::vector<double>& b) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double lx = std::log(r[i]);
    const double ly = std::log(b[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

void orthogonality(std::vector<CheckResult>& out) {
  const SensitivityParam lambda(2.0);
  const Nuisance exact = exact_nuisance(lambda);
  const std::vector<double> radii{0.1, 0.05, 0.025};
  constexpr double kExactZero = 1e-12;

  auto run = [&](const std::string& criterion, const Probe& probe,
                 const std::function<double(const Nuisance&, ScoreKind)>& value) {
    for (ScoreKind kind : {ScoreKind::kOrthogonal, probe.plug_in}) {
      const double base = value(exact, kind);
      std::vector<double> bias;
      for (double r : radii) {
        Nuisance n = exact;
        probe.shift(n, r);
        bias.push_back(std::abs(value(n, kind) - base));
      }
      const double largest = *std::max_element(bias.begin(), bias.end());
      const std::string label = criterion + " " + probe.name;
      if (kind == ScoreKind::kOrthogonal) {
        if (largest <= kExactZero) {
          // First and second order both vanish along this direction.
          out.push_back(make("orthogonality", label + " orthogonal", largest, kExactZero, "bias identically zero"));
        } else {
          const double slope = loglog_slope(radii, bias);
          out.push_back(make("orthogonality", label + " orthogonal", std::max(0.0, 1.9 - slope), 0.0,
                             "slope " + fmt(slope)));
        }
      } else {
        const double slope = largest > kExactZero ? loglog_slope(radii, bias) : 0.0;
        out.push_back(make("orthogonality", label + " plug-in", std::max(0.0, slope - 1.2), 0.0,
                           "slope " + fmt(slope) + (largest > kExactZero ? "" : ", no bias")));
        if (largest <= kExactZero) out.back().passed = false;
      }
    }
  };

  const auto shift_e = [](Nuisance& n, double r) {
    for (std::size_t x = 0; x < 2; ++x) n.e1[x] += r * kDirE[x];
  };
  std::vector<Probe> w_probes{
      {"e", shift_e, ScoreKind::kPlugIn},
      {"q-", [](Nuisance& n, double r) { add(n.lower.q, kDirQ, r); }, ScoreKind::kPlugIn},
      {"rho-_below", [](Nuisance& n, double r) { add(n.lower.below, kDirBelow, r); }, ScoreKind::kRegression},
      {"rho-_above", [](Nuisance& n, double r) { add(n.lower.above, kDirAbove, r); }, ScoreKind::kRegression},
      {"joint",
       [&](Nuisance& n, double r) {
         shift_e(n, r);
         add(n.lower.q, kDirQ, r);
         add(n.lower.below, kDirBelow, r);
         add(n.lower.above, kDirAbove, r);
       },
       ScoreKind::kPlugIn},
  };
  for (const auto& p : w_probes) {
    run("psi_W", p, [&](const Nuisance& n, ScoreKind k) { return expected_w(n, k, lambda); });
  }
  std::vector<Probe> d_probes = w_probes;
  d_probes.pop_back();
  d_probes.push_back({"q+", [](Nuisance& n, double r) { add(n.upper.q, kDirQ, r); }, ScoreKind::kPlugIn});
  d_probes.push_back(
      {"rho+_below", [](Nuisance& n, double r) { add(n.upper.below, kDirBelow, r); }, ScoreKind::kRegression});
  d_probes.push_back(
      {"rho+_above", [](Nuisance& n, double r) { add(n.upper.above, kDirAbove, r); }, ScoreKind::kRegression});
  d_probes.push_back({"joint",
                      [&](Nuisance& n, double r) {
                        shift_e(n, r);
                        add(n.lower.q, kDirQ, r);
                        add(n.upper.q, kDirQ, r);
                        add(n.lower.below, kDirBelow, r);
                        add(n.upper.above, kDirAbove, r);
                      },
                      ScoreKind::kPlugIn});
  for (const auto& p : d_probes) {
    run("psi_Delta", p, [&](const Nuisance& n, ScoreKind k) { return expected_delta(n, k, lambda); });
  }
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& options) {
  std::vector<CheckResult> out;
  closed_form_vs_lp(options, out);
  lp_feasibility(out);
  unconfounded_reduction(out);
  moment_identity(out);
  orthogonality(out);
  return out;
}

nlohmann::json selfcheck_to_json(const std::vector<CheckResult>& results) {
  nlohmann::json suites = nlohmann::json::object();
  for (const auto& r : results) {
    auto& suite = suites[r.suite];
    if (suite.is_null()) suite = {{"passed", true}, {"checks", nlohmann::json::array()}};
    nlohmann::json check{{"name", r.name}, {"deviation", r.deviation}, {"tolerance", r.tolerance},
                         {"passed", r.passed}};
    if (!r.detail.empty()) check["detail"] = r.detail;
    suite["checks"].push_back(check);
    if (!r.passed) suite["passed"] = false;
  }
  return {{"passed", all_passed(results)}, {"suites", suites}};
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace msmpolicy
