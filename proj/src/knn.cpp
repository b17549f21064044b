#include "msmpolicy/knn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "msmpolicy/stats.hpp"

namespace msmpolicy {

KnnIndex::KnnIndex(const Dataset& train) : n_(train.n()), d_(train.d()) {
  scale_.assign(d_, 1.0);
  std::vector<double> col(n_);
  for (std::size_t j = 0; j < d_; ++j) {
    for (std::size_t i = 0; i < n_; ++i) col[i] = train[i].x[j];
    const double sd = sample_sd(col);
    if (sd > 0.0) scale_[j] = 1.0 / sd;
  }
  points_.resize(n_ * d_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) points_[i * d_ + j] = train[i].x[j] * scale_[j];
  }
}

std::vector<std::size_t> KnnIndex::neighbors(std::span<const double> x, std::size_t k) const {
  k = std::min(k, n_);
  std::vector<std::pair<double, std::size_t>> dist(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      const double diff = points_[i * d_ + j] - x[j] * scale_[j];
      s += diff * diff;
    }
    dist[i] = {s, i};
  }
  if (k < n_) {
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  }
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

std::size_t default_neighbor_count(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.6))));
}

}  // namespace msmpolicy
