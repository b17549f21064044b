#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msmpolicy/dataset.hpp"
#include "msmpolicy/nuisance.hpp"
#include "msmpolicy/policy.hpp"
#include "msmpolicy/sensitivity.hpp"
#include "msmpolicy/stats.hpp"

namespace msmpolicy {

/// Doubly robust score for the lower bound on E[Y(t) | X] at arm t:
///   y 1{a=t} [1 + r lambda^{-sgn(y-q)}]
///   + q 1{a=t} r (lambda - 1/lambda) [1/(1+lambda) - 1{y<q}]
///   - (1/e) [lambda rho_below + rho_above/lambda] (1{a=t} - e)
/// with r = (1-e)/e, q the level-1/(1+lambda) quantile and rho the truncated
/// means around it. Throws PropensityOutOfRange unless 0 < e < 1.
double phi_minus(double y, int a, int t, double e, double q, double rho_below, double rho_above,
                 const SensitivityParam& lambda);

/// Mirror score for the upper bound, with q the level-lambda/(1+lambda) quantile:
///   y 1{a=t} [1 + r lambda^{sgn(y-q)}]
///   - q 1{a=t} r (lambda - 1/lambda) [lambda/(1+lambda) - 1{y<q}]
///   - (1/e) [rho_below/lambda + lambda rho_above] (1{a=t} - e)
double phi_plus(double y, int a, int t, double e, double q, double rho_below, double rho_above,
                const SensitivityParam& lambda);

/// sum_t phi_minus_t pi(t|x). Throws DimensionMismatch on length mismatch.
double psi_w(std::span<const double> phi_minus_row, std::span<const double> probabilities);

/// pi(x) (phi_minus_1 - phi_plus_0).
double psi_delta(double phi_minus_1, double phi_plus_0, double treat_probability);

enum class ScoreSource { kCrossfit, kOracle };

/// Per-unit, per-arm scores with the covariates they were built at.
class ScoreTable {
 public:
  ScoreTable(SensitivityParam lambda, int m, ScoreSource source, std::vector<std::vector<double>> x,
             std::vector<double> phi_minus, std::vector<double> phi_plus);

  std::size_t n() const noexcept { return x_.size(); }
  int m() const noexcept { return m_; }
  const SensitivityParam& lambda() const noexcept { return lambda_; }
  ScoreSource source() const noexcept { return source_; }
  bool has_plus() const noexcept { return !phi_plus_.empty(); }
  const std::vector<double>& x(std::size_t i) const { return x_[i]; }

  double phi_minus(std::size_t i, int t) const { return phi_minus_[i * static_cast<std::size_t>(m_) + t]; }
  /// Throws MissingNuisance when the table was built without upper scores.
  double phi_plus(std::size_t i, int t) const;
  std::span<const double> phi_minus_row(std::size_t i) const {
    return {phi_minus_.data() + i * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
  }

  /// phi_minus_1 - phi_minus_0 per unit (binary only).
  std::vector<double> gains_mmw() const;
  /// phi_minus_1 - phi_plus_0 per unit (binary only, needs upper scores).
  std::vector<double> gains_mmi() const;

 private:
  SensitivityParam lambda_;
  int m_;
  ScoreSource source_;
  std::vector<std::vector<double>> x_;
  std::vector<double> phi_minus_;  // row-major n x m
  std::vector<double> phi_plus_;   // row-major n x m, or empty
};

/// Scores every unit with the predictors of its own fold. `need_plus` also
/// fills the upper scores and throws MissingNuisance when the model lacks the
/// upper-level nuisances. `rearranged`, when given, receives the number of
/// units whose lower and upper quantile predictions had to be swapped.
ScoreTable build_score_table(const Dataset& data, const NuisanceModel& model, bool need_plus, int threads = 1,
                             ScoreSource source = ScoreSource::kCrossfit, std::size_t* rearranged = nullptr);

/// Mean of psi_w over the table, with the i.i.d. standard error.
MeanSe estimate_W(const ScoreTable& table, const Policy& policy);
/// Mean of psi_delta over the table (binary only).
MeanSe estimate_Delta(const ScoreTable& table, const Policy& policy);
/// Improvement over a baseline: with w = pi(x) - pi0(x), a unit contributes
/// w (phi_minus_1 - phi_plus_0) when w > 0 and w (phi_plus_1 - phi_minus_0)
/// when w < 0.
MeanSe estimate_Delta_vs_baseline(const ScoreTable& table, const Policy& policy, const Policy& baseline);

/// Long-format CSV `unit,arm,phi_minus[,phi_plus]`.
std::string score_table_to_csv(const ScoreTable& table);

}  // namespace msmpolicy
