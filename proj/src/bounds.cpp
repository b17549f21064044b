#include "msmpolicy/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "msmpolicy/error.hpp"

namespace msmpolicy {

namespace {

void check_propensity(double e) {
  if (!(e > 0.0 && e < 1.0)) {
    throw Error(ErrorCode::kPropensityOutOfRange, "propensity must lie in (0,1), got " + std::to_string(e));
  }
}

double exponent_sign(BoundSide side, SignConvention convention) {
  const double s = side == BoundSide::kLower ? -1.0 : 1.0;
  return convention == SignConvention::kStandard ? s : -s;
}

double level_of(const SensitivityParam& lambda, BoundSide side) {
  return side == BoundSide::kLower ? lambda.lower_level() : lambda.upper_level();
}

}  // namespace

double mu_bound_pointwise(double y, int a_obs, int arm, double e, double q, const SensitivityParam& lambda,
                          BoundSide side, SignConvention convention) {
  check_propensity(e);
  if (a_obs != arm) return 0.0;
  const double r = (1.0 - e) / e;
  const double power = exponent_sign(side, convention) * sgn(y - q);
  return y * (1.0 + r * std::pow(lambda.value(), power));
}

double mu_bound_from_nuisance(double e, double rho_below, double rho_above, const SensitivityParam& lambda,
                              BoundSide side) {
  check_propensity(e);
  const double l = lambda.value();
  const double tails = side == BoundSide::kLower ? l * rho_below + rho_above / l : rho_below / l + l * rho_above;
  return e * (rho_below + rho_above) + (1.0 - e) * tails;
}

FiniteConditionalLaw::FiniteConditionalLaw(int arm, double e, std::vector<Atom> atoms) : arm_(arm), e_(e) {
  check_propensity(e);
  if (atoms.empty()) throw Error(ErrorCode::kBadLaw, "law has no atoms");
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (!std::isfinite(atom.y) || !std::isfinite(atom.p) || atom.p <= 0.0) {
      throw Error(ErrorCode::kBadLaw, "atoms need finite outcomes and positive masses");
    }
    total += atom.p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::kBadLaw, "masses do not sum to 1");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.y < b.y; });
  for (const auto& atom : atoms) {
    if (!atoms_.empty() && atoms_.back().y == atom.y) {
      atoms_.back().p += atom.p;
    } else {
      atoms_.push_back(atom);
    }
  }
}

double FiniteConditionalLaw::mean() const {
  double s = 0.0;
  for (const auto& atom : atoms_) s += atom.p * atom.y;
  return s;
}

double FiniteConditionalLaw::quantile(double level) const {
  double cum = 0.0;
  for (const auto& atom : atoms_) {
    cum += atom.p;
    if (cum >= level - 1e-14) return atom.y;
  }
  return atoms_.back().y;
}

double FiniteConditionalLaw::cdf(double c) const {
  double cum = 0.0;
  for (const auto& atom : atoms_) {
    if (atom.y > c) break;
    cum += atom.p;
  }
  return cum;
}

double FiniteConditionalLaw::mean_below(double c) const {
  double s = 0.0;
  for (const auto& atom : atoms_) {
    if (atom.y < c) s += atom.p * atom.y;
  }
  return s;
}

double FiniteConditionalLaw::mean_above(double c) const {
  double s = 0.0;
  for (const auto& atom : atoms_) {
    if (atom.y > c) s += atom.p * atom.y;
  }
  return s;
}

LpSolution sharp_bound_finite(const FiniteConditionalLaw& law, const SensitivityParam& lambda, Direction direction) {
  const auto& atoms = law.atoms();
  const double e = law.e();
  const double r = (1.0 - e) / e;
  const double l = lambda.value();
  LpSolution out;
  out.weights.assign(atoms.size(), 1.0 / e);
  if (l > 1.0) {
    const double low = 1.0 + r / l;
    const double high = 1.0 + r * l;
    std::fill(out.weights.begin(), out.weights.end(), low);
    // Mass-weighted excess still to hand out once every weight sits at `low`.
    double budget = r * (1.0 - 1.0 / l);
    const std::size_t count = atoms.size();
    for (std::size_t step = 0; step < count && budget > 0.0; ++step) {
      const std::size_t j = direction == Direction::kMax ? count - 1 - step : step;
      const double cost = atoms[j].p * (high - low);
      if (cost <= budget) {
        out.weights[j] = high;
        budget -= cost;
      } else {
        out.weights[j] = low + budget / atoms[j].p;
        budget = 0.0;
      }
    }
    if (budget > 1e-12) throw Error(ErrorCode::kInfeasible, "weight budget could not be met");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) s += atoms[j].p * atoms[j].y * out.weights[j];
  out.value = e * s;
  return out;
}

double closed_form_bound(const FiniteConditionalLaw& law, const SensitivityParam& lambda, BoundSide side,
                         SignConvention convention) {
  const double q = law.quantile(level_of(lambda, side));
  double s = 0.0;
  for (const auto& atom : law.atoms()) {
    s += atom.p * mu_bound_pointwise(atom.y, law.arm(), law.arm(), law.e(), q, lambda, side, convention);
  }
  return law.e() * s;
}

BoundPair tau_bounds(const BoundPair& mu1, const BoundPair& mu0) {
  if (mu1.lower > mu1.upper + 1e-12 || mu0.lower > mu0.upper + 1e-12) {
    throw Error(ErrorCode::kUnorderedInput, "bound pair has lower > upper");
  }
  return {mu1.lower - mu0.upper, mu1.upper - mu0.lower};
}

int first_best_mmw(double mu_lower_1, double mu_lower_0) { return mu_lower_1 - mu_lower_0 > 0.0 ? 1 : 0; }

int first_best_mmi(double tau_lower) { return tau_lower > 0.0 ? 1 : 0; }

int pz_rule(double tau_lower, double tau_upper) {
  if (tau_lower > tau_upper) throw Error(ErrorCode::kUnorderedInput, "tau_lower > tau_upper");
  if (tau_lower > 0.0) return 1;
  if (tau_upper < 0.0) return 0;
  return tau_lower + tau_upper > 0.0 ? 1 : 0;
}

}  // namespace msmpolicy
