#include "msmpolicy/stats.hpp"

#include <algorithm>
#include <cmath>

namespace msmpolicy {

std::size_t quantile_rank(std::size_t n, double tau) {
  const double scaled = tau * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

double empirical_quantile_inplace(std::span<double> values, double tau) {
  const std::size_t k = quantile_rank(values.size(), tau);
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

MeanSe mean_and_se(std::span<const double> v) {
  MeanSe out;
  out.mean = mean(v);
  out.se = v.empty() ? 0.0 : sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
  return out;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

}  // namespace msmpolicy
