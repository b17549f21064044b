#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msmpolicy/dataset.hpp"

namespace msmpolicy {

enum class GbtLoss { kSquared, kLogistic, kPinball };

struct GbtParams {
  int trees = 200;
  int depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 10;
};

/// Gradient boosted regression trees.
///
/// Each feature is bucketed once per fit: one bin per distinct training
/// value when there are at most 256 of them (the split search is then
/// exact), otherwise about n/256 units per bin with ties kept together.
/// Thresholds sit midway between adjacent occupied bins. Trees are grown
/// level-wise on the negative gradient with a gradient-over-hessian gain. Leaf values depend on the loss:
///   squared   mean residual,
///   logistic  one Newton step on the log-likelihood,
///   pinball   empirical tau-quantile of the residuals in the leaf.
/// Each leaf value is scaled by the learning rate. For the squared and
/// pinball losses the scaled value is a convex combination of zero and the
/// per-leaf minimiser, so training loss never increases between rounds.
class GbtRegressor {
 public:
  static GbtRegressor fit(const FeatureMatrix& x, std::span<const double> y, GbtLoss loss,
                          const GbtParams& params, double tau = 0.5);

  /// Raw additive score (log-odds for the logistic loss).
  double predict(std::span<const double> x) const;

  /// Mean training loss after the initial constant and after every round.
  const std::vector<double>& training_loss() const noexcept { return training_loss_; }

  std::size_t tree_count() const noexcept { return tree_roots_.size(); }

 private:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  double base_ = 0.0;
  std::vector<Node> nodes_;
  std::vector<int> tree_roots_;
  std::vector<double> training_loss_;
};

double pinball_loss(double y, double pred, double tau);

}  // namespace msmpolicy
