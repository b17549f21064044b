#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace msmpolicy {

/// inf{q : F_n(q) >= tau} for the empirical CDF of `values`. Reorders `values`.
double empirical_quantile_inplace(std::span<double> values, double tau);

inline double empirical_quantile(std::vector<double> values, double tau) {
  return empirical_quantile_inplace(values, tau);
}

/// Index (1-based count) k of the order statistic selected by the quantile:
/// smallest k with k/n >= tau, guarded against round-off in tau*n.
std::size_t quantile_rank(std::size_t n, double tau);

double mean(std::span<const double> v);

/// Sample standard deviation with n-1 denominator (0 for n < 2).
double sample_sd(std::span<const double> v);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean and i.i.d. standard error sd/sqrt(n).
MeanSe mean_and_se(std::span<const double> v);

double sigmoid(double z);

}  // namespace msmpolicy
