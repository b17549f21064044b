#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "msmpolicy/bounds.hpp"
#include "msmpolicy/error.hpp"
#include "msmpolicy/random.hpp"

using namespace msmpolicy;

namespace {

FiniteConditionalLaw uniform_grid(std::size_t atoms, double e) {
  std::vector<Atom> a;
  for (std::size_t j = 0; j < atoms; ++j) a.push_back({(j + 0.5) / atoms, 1.0 / atoms});
  return FiniteConditionalLaw(1, e, a);
}

FiniteConditionalLaw random_law(Rng& rng) {
  const std::size_t k = 1 + rng.below(10);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    atoms.push_back({rng.normal(0, 2), rng.uniform(0.05, 1.0)});
    total += atoms.back().p;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    atoms[j].p /= total;
    acc += atoms[j].p;
  }
  atoms.back().p = 1.0 - acc;
  return FiniteConditionalLaw(static_cast<int>(rng.below(2)), rng.uniform(0.05, 0.95), atoms);
}

// Independent LP oracle: enumerate the single-pivot vertex solutions of the
// box-and-balance polytope and keep the best feasible one.
double enumerate_vertices(const FiniteConditionalLaw& law, const SensitivityParam& lambda, Direction dir) {
  const auto& atoms = law.atoms();
  const double e = law.e();
  const double r = (1.0 - e) / e;
  const double lo = 1.0 + r / lambda.value(), hi = 1.0 + r * lambda.value();
  const std::size_t k = atoms.size();
  double best = dir == Direction::kMax ? -INFINITY : INFINITY;
  // Every vertex has at most one coordinate strictly inside the box.
  for (std::size_t pivot = 0; pivot < k; ++pivot) {
    for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
      double fixed = 0.0, value = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == pivot) continue;
        const double w = (mask >> j) & 1 ? hi : lo;
        fixed += atoms[j].p * w;
        value += atoms[j].p * atoms[j].y * w;
      }
      const double wp = (1.0 / e - fixed) / atoms[pivot].p;
      if (wp < lo - 1e-12 || wp > hi + 1e-12) continue;
      value += atoms[pivot].p * atoms[pivot].y * wp;
      best = dir == Direction::kMax ? std::max(best, e * value) : std::min(best, e * value);
    }
  }
  return best;
}

}  // namespace

TEST(Pointwise, Examples) {
  const SensitivityParam two(2.0), one(1.0);
  EXPECT_DOUBLE_EQ(mu_bound_pointwise(2.0, 1, 1, 0.5, 1.0, two, BoundSide::kLower), 3.0);
  EXPECT_EQ(mu_bound_pointwise(2.0, 0, 1, 0.5, 1.0, two, BoundSide::kLower), 0.0);
  for (double y : {-3.0, 0.0, 0.7, 5.0}) {
    for (double q : {-1.0, 0.7, 9.0}) {
      EXPECT_DOUBLE_EQ(mu_bound_pointwise(y, 1, 1, 0.4, q, one, BoundSide::kLower), y / 0.4);
      EXPECT_DOUBLE_EQ(mu_bound_pointwise(y, 1, 1, 0.4, q, one, BoundSide::kUpper), y / 0.4);
    }
  }
  EXPECT_THROW(mu_bound_pointwise(1.0, 1, 1, 0.0, 0.0, two, BoundSide::kLower), Error);
}

TEST(SharpBound, UnconfoundedIsMean) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto law = random_law(rng);
    const SensitivityParam one(1.0);
    EXPECT_NEAR(sharp_bound_finite(law, one, Direction::kMax).value, law.mean(), 1e-12);
    EXPECT_NEAR(sharp_bound_finite(law, one, Direction::kMin).value, law.mean(), 1e-12);
  }
}

TEST(SharpBound, TwoPointExample) {
  const FiniteConditionalLaw law(1, 0.5, {{0.0, 0.5}, {1.0, 0.5}});
  const auto sol = sharp_bound_finite(law, SensitivityParam(2.0), Direction::kMax);
  EXPECT_NEAR(sol.value, 0.625, 1e-15);
  ASSERT_EQ(sol.weights.size(), 2u);
  EXPECT_NEAR(sol.weights[0], 1.5, 1e-15);
  EXPECT_NEAR(sol.weights[1], 2.5, 1e-15);
}

TEST(SharpBound, UniformAnchor) {
  const auto law = uniform_grid(2000, 0.5);
  const SensitivityParam two(2.0);
  EXPECT_NEAR(sharp_bound_finite(law, two, Direction::kMax).value, 7.0 / 12.0, 2e-3);
  EXPECT_NEAR(sharp_bound_finite(law, two, Direction::kMin).value, 5.0 / 12.0, 2e-3);
  EXPECT_NEAR(closed_form_bound(law, two, BoundSide::kUpper), 7.0 / 12.0, 2e-3);
  EXPECT_NEAR(closed_form_bound(law, two, BoundSide::kLower), 5.0 / 12.0, 2e-3);
}

TEST(SharpBound, MatchesVertexEnumeration) {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const auto law = random_law(rng);
    const SensitivityParam lambda(1.0 + rng.uniform(0.0, 6.0));
    for (Direction d : {Direction::kMin, Direction::kMax}) {
      EXPECT_NEAR(sharp_bound_finite(law, lambda, d).value, enumerate_vertices(law, lambda, d), 1e-10);
    }
  }
}

TEST(SharpBound, FeasibilityNestingSandwich) {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const auto law = random_law(rng);
    const double e = law.e();
    const double r = (1.0 - e) / e;
    double prev_max = law.mean(), prev_min = law.mean();
    for (double lam : {1.0, 1.2, 1.5, 2.0, 3.0, 4.482, 10.0}) {
      const SensitivityParam lambda(lam);
      for (Direction d : {Direction::kMin, Direction::kMax}) {
        const auto sol = sharp_bound_finite(law, lambda, d);
        double balance = 0.0;
        for (std::size_t j = 0; j < sol.weights.size(); ++j) {
          EXPECT_GE(sol.weights[j], 1.0 + r / lam - 1e-10);
          EXPECT_LE(sol.weights[j], 1.0 + r * lam + 1e-10);
          balance += law.atoms()[j].p * sol.weights[j];
        }
        EXPECT_NEAR(balance, 1.0 / e, 1e-10);
      }
      const double hi = sharp_bound_finite(law, lambda, Direction::kMax).value;
      const double lo = sharp_bound_finite(law, lambda, Direction::kMin).value;
      EXPECT_GE(hi, prev_max - 1e-12);
      EXPECT_LE(lo, prev_min + 1e-12);
      EXPECT_LE(lo, law.mean() + 1e-12);
      EXPECT_GE(hi, law.mean() - 1e-12);
      prev_max = hi;
      prev_min = lo;
    }
  }
}

TEST(SharpBound, AtomAtQuantileCaveat) {
  // Two atoms, quantile sits on an atom: the pointwise closed form is no
  // longer balanced and overshoots the sharp upper bound.
  const FiniteConditionalLaw law(1, 0.5, {{0.0, 0.5}, {1.0, 0.5}});
  const SensitivityParam two(2.0);
  EXPECT_GT(closed_form_bound(law, two, BoundSide::kUpper), sharp_bound_finite(law, two, Direction::kMax).value);
}

TEST(TauBounds, Examples) {
  const BoundPair unif{5.0 / 12.0, 7.0 / 12.0};
  const auto tau = tau_bounds(unif, unif);
  EXPECT_NEAR(tau.lower, -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(tau.upper, 1.0 / 6.0, 1e-15);
  const auto point = tau_bounds({0.3, 0.3}, {0.1, 0.1});
  EXPECT_DOUBLE_EQ(point.lower, 0.2);
  EXPECT_DOUBLE_EQ(point.upper, 0.2);
  const auto sym = tau_bounds({-1.0, 2.0}, {-1.0, 2.0});
  EXPECT_EQ(sym.lower, -sym.upper);
  EXPECT_THROW(tau_bounds({1.0, 0.0}, {0.0, 0.0}), Error);
}

TEST(FirstBest, MmwTieAndInvariance) {
  EXPECT_EQ(first_best_mmw(0.2, 0.1), 1);
  EXPECT_EQ(first_best_mmw(0.1, 0.1), 0);
  EXPECT_EQ(first_best_mmw(-0.5, -0.4), 0);
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal(0, 100);
    EXPECT_EQ(first_best_mmw(a, b), first_best_mmw(a + c, b + c));
  }
}

TEST(FirstBest, MmiAndPz) {
  EXPECT_EQ(first_best_mmi(0.01), 1);
  EXPECT_EQ(first_best_mmi(0.0), 0);
  EXPECT_EQ(first_best_mmi(-1.0 / 6.0), 0);
  // Straddling interval with positive midpoint: PZ treats, MMI does not.
  EXPECT_EQ(pz_rule(-0.1, 0.5), 1);
  EXPECT_EQ(first_best_mmi(-0.1), 0);
  // Straddling with negative midpoint: both withhold.
  EXPECT_EQ(pz_rule(-0.5, 0.1), 0);
  EXPECT_EQ(pz_rule(-0.1, 0.1), 0);
  EXPECT_EQ(pz_rule(0.2, 0.4), 1);
  EXPECT_EQ(pz_rule(-0.4, -0.2), 0);
  EXPECT_THROW(pz_rule(0.3, 0.1), Error);
}

TEST(FiniteLaw, Validation) {
  EXPECT_THROW(FiniteConditionalLaw(1, 0.5, {}), Error);
  EXPECT_THROW(FiniteConditionalLaw(1, 0.5, {{0.0, 0.5}, {1.0, 0.4}}), Error);
  EXPECT_THROW(FiniteConditionalLaw(1, 1.0, {{0.0, 1.0}}), Error);
  const FiniteConditionalLaw law(0, 0.3, {{2.0, 0.25}, {1.0, 0.25}, {2.0, 0.5}});
  EXPECT_EQ(law.atoms().size(), 2u);
  EXPECT_EQ(law.quantile(0.25), 1.0);
  EXPECT_EQ(law.quantile(0.26), 2.0);
  EXPECT_DOUBLE_EQ(law.mean_below(2.0), 0.25);
  EXPECT_DOUBLE_EQ(law.mean_above(1.0), 1.5);
}
