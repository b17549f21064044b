#include "msmpolicy/scores.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "msmpolicy/bounds.hpp"
#include "msmpolicy/error.hpp"
#include "msmpolicy/parallel.hpp"

namespace msmpolicy {

namespace {

void check_propensity(double e) {
  if (!(e > 0.0 && e < 1.0)) {
    throw Error(ErrorCode::kPropensityOutOfRange, "propensity must lie in (0,1), got " + std::to_string(e));
  }
}

void require_binary(int m) {
  if (m != 2) throw Error(ErrorCode::kNotBinary, "operation needs exactly two arms");
}

}  // namespace

double phi_minus(double y, int a, int t, double e, double q, double rho_below, double rho_above,
                 const SensitivityParam& lambda) {
  check_propensity(e);
  const double l = lambda.value();
  const double r = (1.0 - e) / e;
  const double hit = a == t ? 1.0 : 0.0;
  const double plug_in = hit * y * (1.0 + r * std::pow(l, -sgn(y - q)));
  const double quantile_term = hit * q * r * (l - 1.0 / l) * (lambda.lower_level() - (y < q ? 1.0 : 0.0));
  const double propensity_term = -(l * rho_below + rho_above / l) * (hit - e) / e;
  return plug_in + quantile_term + propensity_term;
}

double phi_plus(double y, int a, int t, double e, double q, double rho_below, double rho_above,
                const SensitivityParam& lambda) {
  check_propensity(e);
  const double l = lambda.value();
  const double r = (1.0 - e) / e;
  const double hit = a == t ? 1.0 : 0.0;
  const double plug_in = hit * y * (1.0 + r * std::pow(l, sgn(y - q)));
  const double quantile_term = -hit * q * r * (l - 1.0 / l) * (lambda.upper_level() - (y < q ? 1.0 : 0.0));
  const double propensity_term = -(rho_below / l + l * rho_above) * (hit - e) / e;
  return plug_in + quantile_term + propensity_term;
}

double psi_w(std::span<const double> phi_minus_row, std::span<const double> probabilities) {
  if (phi_minus_row.size() != probabilities.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "score row and policy probabilities differ in length");
  }
  double s = 0.0;
  for (std::size_t t = 0; t < phi_minus_row.size(); ++t) s += phi_minus_row[t] * probabilities[t];
  return s;
}

double psi_delta(double phi_minus_1, double phi_plus_0, double treat_probability) {
  return treat_probability * (phi_minus_1 - phi_plus_0);
}

ScoreTable::ScoreTable(SensitivityParam lambda, int m, ScoreSource source, std::vector<std::vector<double>> x,
                       std::vector<double> phi_minus, std::vector<double> phi_plus)
    : lambda_(lambda),
      m_(m),
      source_(source),
      x_(std::move(x)),
      phi_minus_(std::move(phi_minus)),
      phi_plus_(std::move(phi_plus)) {
  const std::size_t cells = x_.size() * static_cast<std::size_t>(m_);
  if (phi_minus_.size() != cells || (!phi_plus_.empty() && phi_plus_.size() != cells)) {
    throw Error(ErrorCode::kDimensionMismatch, "score arrays do not match n x m");
  }
  for (double v : phi_minus_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite score");
  }
  for (double v : phi_plus_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite score");
  }
}

double ScoreTable::phi_plus(std::size_t i, int t) const {
  if (phi_plus_.empty()) throw Error(ErrorCode::kMissingNuisance, "table has no upper scores");
  return phi_plus_[i * static_cast<std::size_t>(m_) + t];
}

std::vector<double> ScoreTable::gains_mmw() const {
  require_binary(m_);
  std::vector<double> g(n());
  for (std::size_t i = 0; i < n(); ++i) g[i] = phi_minus(i, 1) - phi_minus(i, 0);
  return g;
}

std::vector<double> ScoreTable::gains_mmi() const {
  require_binary(m_);
  std::vector<double> g(n());
  for (std::size_t i = 0; i < n(); ++i) g[i] = phi_minus(i, 1) - phi_plus(i, 0);
  return g;
}

ScoreTable build_score_table(const Dataset& data, const NuisanceModel& model, bool need_plus, int threads,
                             ScoreSource source, std::size_t* rearranged) {
  if (data.m() != model.m()) throw Error(ErrorCode::kDimensionMismatch, "dataset and nuisance arms differ");
  if (data.n() != model.folds().n()) throw Error(ErrorCode::kDimensionMismatch, "dataset and folds differ in n");
  if (need_plus && !model.has_upper()) {
    throw Error(ErrorCode::kMissingNuisance, "upper-level nuisances were not fitted");
  }
  const auto m = static_cast<std::size_t>(data.m());
  const std::size_t n = data.n();
  const SensitivityParam& lambda = model.lambda();
  std::vector<double> minus(n * m);
  std::vector<double> plus(need_plus ? n * m : 0);
  std::vector<std::vector<double>> x(n);
  std::vector<char> swapped(n, 0);
  const std::size_t chunk = 256;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    for (std::size_t i = c * chunk; i < std::min(n, (c + 1) * chunk); ++i) {
      const auto& row = data[i];
      x[i] = row.x;
      const NuisanceValues v = model.predict_for_unit(i, row.x);
      swapped[i] = v.rearranged ? 1 : 0;
      for (std::size_t t = 0; t < m; ++t) {
        const int arm = static_cast<int>(t);
        minus[i * m + t] = phi_minus(row.y, row.a, arm, v.e[t], v.q_lower[t], v.rho_below_lower[t],
                                     v.rho_above_lower[t], lambda);
        if (need_plus) {
          plus[i * m + t] = phi_plus(row.y, row.a, arm, v.e[t], v.q_upper[t], v.rho_below_upper[t],
                                     v.rho_above_upper[t], lambda);
        }
      }
    }
  });
  if (rearranged != nullptr) *rearranged = static_cast<std::size_t>(std::count(swapped.begin(), swapped.end(), 1));
  return ScoreTable(lambda, data.m(), source, std::move(x), std::move(minus), std::move(plus));
}

MeanSe estimate_W(const ScoreTable& table, const Policy& policy) {
  if (policy.m() != table.m()) throw Error(ErrorCode::kDimensionMismatch, "policy and scores differ in arms");
  std::vector<double> psi(table.n());
  for (std::size_t i = 0; i < table.n(); ++i) {
    psi[i] = psi_w(table.phi_minus_row(i), policy.assign_probabilities(table.x(i)));
  }
  return mean_and_se(psi);
}

MeanSe estimate_Delta(const ScoreTable& table, const Policy& policy) {
  require_binary(table.m());
  if (policy.m() != 2) throw Error(ErrorCode::kNotBinary, "policy must be binary");
  std::vector<double> psi(table.n());
  for (std::size_t i = 0; i < table.n(); ++i) {
    psi[i] = psi_delta(table.phi_minus(i, 1), table.phi_plus(i, 0), policy.treat_probability(table.x(i)));
  }
  return mean_and_se(psi);
}

MeanSe estimate_Delta_vs_baseline(const ScoreTable& table, const Policy& policy, const Policy& baseline) {
  require_binary(table.m());
  if (policy.m() != 2 || baseline.m() != 2) throw Error(ErrorCode::kNotBinary, "policies must be binary");
  std::vector<double> psi(table.n());
  for (std::size_t i = 0; i < table.n(); ++i) {
    const double w = policy.treat_probability(table.x(i)) - baseline.treat_probability(table.x(i));
    if (w > 0.0) {
      psi[i] = w * (table.phi_minus(i, 1) - table.phi_plus(i, 0));
    } else if (w < 0.0) {
      psi[i] = w * (table.phi_plus(i, 1) - table.phi_minus(i, 0));
    } else {
      psi[i] = 0.0;
    }
  }
  return mean_and_se(psi);
}

std::string score_table_to_csv(const ScoreTable& table) {
  std::string out = table.has_plus() ? "unit,arm,phi_minus,phi_plus\n" : "unit,arm,phi_minus\n";
  for (std::size_t i = 0; i < table.n(); ++i) {
    for (int t = 0; t < table.m(); ++t) {
      out += std::to_string(i) + ',' + std::to_string(t) + ',' + format_double(table.phi_minus(i, t));
      if (table.has_plus()) out += ',' + format_double(table.phi_plus(i, t));
      out += '\n';
    }
  }
  return out;
}

}  // namespace msmpolicy
