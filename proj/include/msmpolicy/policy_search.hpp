#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "msmpolicy/policy.hpp"

namespace msmpolicy {

/// Covariate rows as seen by the optimizers (row i is unit i).
using CovariateRows = std::vector<std::vector<double>>;

struct QuadrantSearchResult {
  QuadrantPolicy policy;
  double objective = 0.0;  // sum of gains over treated units, summed in index order
  std::size_t treated = 0;
};

/// Exact maximiser of sum_i g_i 1{s1 (x_i[f1] - t1) > 0, s2 (x_i[f2] - t2) > 0}
/// over s in {-1,+1}^2 and thresholds at midpoints of consecutive distinct
/// values plus +-inf. Ties go to the fewest treated units, then the smallest
/// (s1, s2, t1, t2). O(n log n) per sign pattern via a sweep over f1 and a
/// segment tree of best suffix sums over f2.
/// Throws NeedTwoFeatures when f1 == f2 or either is out of range.
QuadrantSearchResult quadrant_search(std::span<const double> gains, const CovariateRows& x, std::size_t f1,
                                     std::size_t f2);

struct TreeSearchResult {
  TreePolicy policy;
  double objective = 0.0;  // sum_i gamma_i(arm(x_i)), summed in index order
};

/// Exact maximiser of sum_i gamma(i, arm(x_i)) over trees of depth <= depth
/// (1 or 2) splitting on `features` at midpoints of consecutive distinct
/// full-sample values. gamma is row-major n x m. Splits that leave a side
/// empty or put the same arm on both leaves are not considered. Ties go to
/// the shallower tree, then the lower feature, lower threshold, lower arm.
/// Throws BadDepth unless depth is 1 or 2.
TreeSearchResult tree_search(std::span<const double> gamma, int m, const CovariateRows& x,
                             std::span<const std::size_t> features, int depth);

struct LogisticSearchOptions {
  int restarts = 20;
  int max_iter = 500;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct LogisticSearchResult {
  LogisticPolicy policy;
  double objective = 0.0;              // (1/n) sum_i sigmoid(T(x_i)'beta) g_i
  std::vector<double> initial_values;  // objective at each start, zero vector first
  std::vector<double> restart_values;  // objective at each final iterate
  bool converged = false;              // the returned iterate met the gradient tolerance
};

/// Gradient ascent with backtracking from the zero vector and `restarts`
/// draws with entries uniform on (-1, 1). Returns the best final iterate.
LogisticSearchResult logistic_ascent(std::span<const double> gains, const CovariateRows& x,
                                     std::span<const std::size_t> features, Basis basis,
                                     const LogisticSearchOptions& options);

}  // namespace msmpolicy
