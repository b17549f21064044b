#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <memory>

#include "msmpolicy/bounds.hpp"
#include "msmpolicy/error.hpp"
#include "msmpolicy/nuisance.hpp"
#include "msmpolicy/random.hpp"
#include "msmpolicy/scores.hpp"

using namespace msmpolicy;

namespace {

ScoreTable table_from(std::vector<std::array<double, 2>> minus, std::vector<std::array<double, 2>> plus = {}) {
  std::vector<std::vector<double>> x;
  std::vector<double> pm, pp;
  for (std::size_t i = 0; i < minus.size(); ++i) {
    x.push_back({static_cast<double>(i)});
    pm.insert(pm.end(), minus[i].begin(), minus[i].end());
    if (!plus.empty()) pp.insert(pp.end(), plus[i].begin(), plus[i].end());
  }
  return ScoreTable(SensitivityParam(2.0), 2, ScoreSource::kCrossfit, x, pm, pp);
}

// Two covariate values, four outcome atoms per arm with masses
// 1/6, 1/6, 1/3, 1/3. The CDF hits 1/3 and 2/3 exactly between atoms, so
// quantiles at those levels are placed at gap midpoints.
constexpr std::array<double, 2> kMassX{0.4, 0.6};
constexpr std::array<double, 2> kE1{0.35, 0.6};
constexpr std::array<double, 4> kMass{1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0};
const std::array<std::array<std::array<double, 4>, 2>, 2> kSupport{{
    {{{-1.0, 0.5, 1.2, 2.0}, {0.2, 1.1, 1.9, 3.0}}},
    {{{-0.3, 0.4, 0.9, 1.7}, {0.0, 1.5, 2.1, 2.5}}},
}};

std::size_t x_index(std::span<const double> x) { return x[0] < 0.5 ? 0 : 1; }
double arm_e(std::size_t x, int a) { return a == 1 ? kE1[x] : 1.0 - kE1[x]; }

FiniteConditionalLaw law_at(std::size_t x, int a) {
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < 4; ++j) atoms.push_back({kSupport[x][static_cast<std::size_t>(a)][j], kMass[j]});
  return FiniteConditionalLaw(a, arm_e(x, a), atoms);
}

class FiniteOracle final : public NuisanceOracle {
 public:
  int arms() const override { return 2; }
  std::vector<double> propensity(std::span<const double> x) const override {
    return {arm_e(x_index(x), 0), arm_e(x_index(x), 1)};
  }
  double quantile(std::span<const double> x, int arm, double level) const override {
    const auto& ys = kSupport[x_index(x)][static_cast<std::size_t>(arm)];
    if (std::abs(level - 1.0 / 3.0) < 1e-12) return 0.5 * (ys[1] + ys[2]);
    if (std::abs(level - 2.0 / 3.0) < 1e-12) return 0.5 * (ys[2] + ys[3]);
    // Median falls on an atom; without confounding any gap point gives the same scores.
    if (std::abs(level - 0.5) < 1e-12) return 0.5 * (ys[1] + ys[2]);
    return law_at(x_index(x), arm).quantile(level);
  }
  double mean_below(std::span<const double> x, int arm, double c) const override {
    return law_at(x_index(x), arm).mean_below(c);
  }
  double mean_above(std::span<const double> x, int arm, double c) const override {
    return law_at(x_index(x), arm).mean_above(c);
  }
};

// The finite law as an exact population: unit counts proportional to the
// cell probabilities (600 units).
Dataset population() {
  std::vector<Observation> rows;
  for (std::size_t x = 0; x < 2; ++x) {
    for (int a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < 4; ++j) {
        const double p = kMassX[x] * arm_e(x, a) * kMass[j];
        const auto count = static_cast<int>(std::lround(600.0 * p));
        for (int c = 0; c < count; ++c) rows.push_back({{static_cast<double>(x)}, a, kSupport[x][static_cast<std::size_t>(a)][j]});
      }
    }
  }
  return validate_dataset(rows, 2);
}

ScoreTable oracle_table(const Dataset& data, double lambda, int folds, bool plus) {
  NuisanceSpec spec;
  spec.learner = LearnerKind::kOracle;
  spec.oracle = std::make_shared<FiniteOracle>();
  spec.lambda = SensitivityParam(lambda);
  spec.folds = folds;
  spec.fit_upper = plus;
  return build_score_table(data, fit_crossfit(data, spec, 5), plus, 1, ScoreSource::kOracle);
}

}  // namespace

TEST(Phi, MinusExamples) {
  const SensitivityParam two(2.0), one(1.0);
  EXPECT_NEAR(phi_minus(2.0, 1, 1, 0.5, 1.0, 0.3, 0.8, two), 2.5, 1e-14);
  EXPECT_NEAR(phi_minus(2.0, 1, 1, 0.5, 1.0, 0.3, 0.8, one), 2.9, 1e-14);
  const double m = 1.1;
  EXPECT_NEAR(phi_minus(2.0, 1, 1, 0.5, 1.0, 0.3, 0.8, one), m + (2.0 - m) / 0.5, 1e-14);
  EXPECT_NEAR(phi_minus(7.0, 0, 1, 0.5, 1.0, 0.3, 0.8, two), 1.0, 1e-14);
}

TEST(Phi, PlusExamples) {
  const SensitivityParam two(2.0), one(1.0);
  EXPECT_NEAR(phi_plus(2.0, 1, 1, 0.5, 1.0, 0.3, 0.8, two), 3.25, 1e-14);
  EXPECT_NEAR(phi_plus(-4.0, 0, 1, 0.5, 1.0, 0.3, 0.8, two), -(1.0 / 0.5) * (0.3 / 2.0 + 2.0 * 0.8) * (0.0 - 0.5),
              1e-14);
  Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    const double y = rng.normal(), q = rng.normal(), e = rng.uniform(0.05, 0.95);
    const double rb = rng.normal(), ra = rng.normal();
    const int a = static_cast<int>(rng.below(2));
    EXPECT_NEAR(phi_plus(y, a, 1, e, q, rb, ra, one), phi_minus(y, a, 1, e, q, rb, ra, one), 1e-12);
  }
  EXPECT_THROW(phi_plus(1.0, 1, 1, 1.0, 0.0, 0.0, 0.0, two), Error);
}

TEST(Psi, Examples) {
  const std::vector<double> row{1.5, 2.5};
  EXPECT_EQ(psi_w(row, std::vector<double>{0.0, 1.0}), 2.5);
  EXPECT_EQ(psi_w(row, std::vector<double>{1.0, 0.0}), 1.5);
  EXPECT_EQ(psi_w(row, std::vector<double>{0.5, 0.5}), 2.0);
  EXPECT_EQ(psi_delta(2.5, 3.25, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(psi_delta(2.5, 3.25, 1.0), -0.75);
  EXPECT_DOUBLE_EQ(psi_delta(2.5, 3.25, 0.5), -0.375);
  EXPECT_THROW(psi_w(row, std::vector<double>{1.0}), Error);
}

TEST(Psi, AffineInTreatProbability) {
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const std::vector<double> row{rng.normal(), rng.normal()};
    const double p1 = rng.uniform(), p2 = rng.uniform(), p3 = rng.uniform();
    auto w = [&](double p) { return psi_w(row, std::vector<double>{1.0 - p, p}); };
    EXPECT_NEAR((w(p2) - w(p1)) * (p3 - p1), (w(p3) - w(p1)) * (p2 - p1), 1e-12);
    EXPECT_NEAR(w(p1) - w(0.0), p1 * (row[1] - row[0]), 1e-12);
    const double g1 = rng.normal(), g0 = rng.normal();
    EXPECT_NEAR(psi_delta(g1, g0, p1) * p2, psi_delta(g1, g0, p2) * p1, 1e-12);
  }
}

TEST(Estimate, WAndDelta) {
  const auto constant = table_from({{0.5, 2.0}, {0.5, 2.0}, {0.5, 2.0}});
  EXPECT_EQ(estimate_W(constant, Policy::always(1, 2)).mean, 2.0);
  EXPECT_EQ(estimate_W(constant, Policy::always(0, 2)).mean, 0.5);
  EXPECT_EQ(estimate_W(table_from({{0.0, 1.0}, {0.0, 3.0}}), Policy::always(1, 2)).mean, 2.0);

  // phi_minus_1 - phi_plus_0 = {-1, +3}
  const auto t = table_from({{0.0, 1.0}, {0.0, 4.0}}, {{2.0, 9.0}, {1.0, 9.0}});
  EXPECT_EQ(estimate_Delta(t, Policy::always(0, 2)).mean, 0.0);
  EXPECT_EQ(estimate_Delta(t, Policy::always(1, 2)).mean, 1.0);
  EXPECT_EQ(estimate_Delta(t, Policy::constant_treat_probability(0.5)).mean, 0.5);
  EXPECT_THROW(estimate_Delta(table_from({{0.0, 1.0}}), Policy::always(1, 2)), Error);
}

TEST(Estimate, DeltaVsBaseline) {
  const auto t = table_from({{0.0, 1.0}, {0.5, 4.0}}, {{2.0, 3.0}, {1.0, 6.0}});
  const auto pi = Policy::constant_treat_probability(0.7);
  EXPECT_EQ(estimate_Delta_vs_baseline(t, pi, pi).mean, 0.0);
  EXPECT_NEAR(estimate_Delta_vs_baseline(t, pi, Policy::always(0, 2)).mean, estimate_Delta(t, pi).mean, 1e-15);
  // Single unit, phi_plus_1 - phi_minus_0 = 2, w = -1.
  const auto one = table_from({{1.0, 0.0}}, {{0.0, 3.0}});
  EXPECT_DOUBLE_EQ(estimate_Delta_vs_baseline(one, Policy::always(0, 2), Policy::always(1, 2)).mean, -2.0);
}

TEST(ScoreTableFromOracle, MomentIdentityOnFinitePopulation) {
  const auto data = population();
  ASSERT_EQ(data.n(), 600u);
  const SensitivityParam two(2.0);
  const auto table = oracle_table(data, 2.0, 5, true);
  for (int t = 0; t < 2; ++t) {
    double mu_lo = 0.0, mu_hi = 0.0;
    for (std::size_t x = 0; x < 2; ++x) {
      mu_lo += kMassX[x] * sharp_bound_finite(law_at(x, t), two, Direction::kMin).value;
      mu_hi += kMassX[x] * sharp_bound_finite(law_at(x, t), two, Direction::kMax).value;
    }
    double sm = 0.0, sp = 0.0;
    for (std::size_t i = 0; i < table.n(); ++i) {
      sm += table.phi_minus(i, t);
      sp += table.phi_plus(i, t);
    }
    EXPECT_NEAR(sm / 600.0, mu_lo, 1e-12);
    EXPECT_NEAR(sp / 600.0, mu_hi, 1e-12);
  }
}

TEST(ScoreTableFromOracle, UnconfoundedIsAipw) {
  const auto data = population();
  const auto table = oracle_table(data, 1.0, 5, true);
  const FiniteOracle oracle;
  double aipw_value = 0.0;
  const auto pi = Policy::constant_treat_probability(0.3);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto& r = data[i];
    const auto xi = x_index(r.x);
    for (int t = 0; t < 2; ++t) {
      const double m = law_at(xi, t).mean();
      const double aipw = m + (r.a == t ? 1.0 : 0.0) * (r.y - m) / arm_e(xi, t);
      EXPECT_NEAR(table.phi_minus(i, t), aipw, 1e-12);
      EXPECT_NEAR(table.phi_plus(i, t), aipw, 1e-12);
    }
    const double m1 = law_at(xi, 1).mean(), m0 = law_at(xi, 0).mean();
    const double p = pi.treat_probability(r.x);
    aipw_value += p * (m1 + (r.a == 1) * (r.y - m1) / arm_e(xi, 1)) +
                  (1.0 - p) * (m0 + (r.a == 0) * (r.y - m0) / arm_e(xi, 0));
  }
  EXPECT_NEAR(estimate_W(table, pi).mean, aipw_value / 600.0, 1e-12);
}

TEST(ScoreTableFromOracle, FoldCountIrrelevant) {
  const auto data = population();
  const auto a = oracle_table(data, 2.0, 2, true);
  const auto b = oracle_table(data, 2.0, 5, true);
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (int t = 0; t < 2; ++t) {
      EXPECT_EQ(a.phi_minus(i, t), b.phi_minus(i, t));
      EXPECT_EQ(a.phi_plus(i, t), b.phi_plus(i, t));
    }
  }
}

TEST(ScoreTableFromOracle, MissingUpperScores) {
  const auto data = population();
  const auto table = oracle_table(data, 2.0, 5, false);
  EXPECT_FALSE(table.has_plus());
  EXPECT_THROW(table.phi_plus(0, 0), Error);
  EXPECT_THROW(table.gains_mmi(), Error);
}

TEST(ScoreTableCsv, Layout) {
  const auto t = table_from({{0.25, 1.0}}, {{2.0, 3.0}});
  EXPECT_EQ(score_table_to_csv(t), "unit,arm,phi_minus,phi_plus\n0,0,0.25,2\n0,1,1,3\n");
}
