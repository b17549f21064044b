#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msmpolicy/dataset.hpp"

namespace msmpolicy {

/// Brute-force nearest neighbours on features standardised by the training
/// standard deviation (features with zero spread keep unit scale). Distance
/// ties resolve to the lower training index.
class KnnIndex {
 public:
  KnnIndex() = default;
  explicit KnnIndex(const Dataset& train);

  std::size_t size() const noexcept { return n_; }

  /// Indices (into the training set) of the min(k, size) nearest rows.
  std::vector<std::size_t> neighbors(std::span<const double> x, std::size_t k) const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> scale_;
  std::vector<double> points_;  // row-major, standardised
};

/// ceil(n^0.6), the default neighbour count.
std::size_t default_neighbor_count(std::size_t n);

}  // namespace msmpolicy
