#include "msmpolicy/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "msmpolicy/error.hpp"
#include "msmpolicy/stats.hpp"

namespace msmpolicy {

double pinball_loss(double y, double pred, double tau) {
  const double r = y - pred;
  return r >= 0 ? tau * r : (tau - 1.0) * r;
}

namespace {

constexpr double kHessianFloor = 1e-12;
constexpr double kMinGain = 1e-12;
constexpr double kMaxLogitStep = 4.0;
constexpr std::size_t kMaxBins = 256;

double mean_loss(std::span<const double> y, std::span<const double> f, GbtLoss loss, double tau) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    switch (loss) {
      case GbtLoss::kSquared: s += 0.5 * (y[i] - f[i]) * (y[i] - f[i]); break;
      case GbtLoss::kLogistic: {
        // log(1 + exp(f)) - y f, stable
        const double z = f[i];
        const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        s += softplus - y[i] * z;
        break;
      }
      case GbtLoss::kPinball: s += pinball_loss(y[i], f[i], tau); break;
    }
  }
  return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

struct SplitCandidate {
  double gain = kMinGain;
  int feature = -1;
  double threshold = 0.0;
};

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

// Per-feature bins over the training values. Bin b holds values in
// [low[b], high[b]]; bins are ordered and disjoint.
struct FeatureBins {
  std::vector<std::uint16_t> bin_of;
  std::vector<double> low;
  std::vector<double> high;
};

FeatureBins make_bins(std::span<const double> col, std::size_t max_bins) {
  const std::size_t n = col.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
  std::size_t distinct = n == 0 ? 0 : 1;
  for (std::size_t k = 1; k < n; ++k) distinct += col[order[k]] > col[order[k - 1]] ? 1 : 0;
  // One bin per distinct value when they fit, otherwise about n / max_bins
  // units per bin without splitting ties.
  const std::size_t target = distinct <= max_bins ? 1 : (n + max_bins - 1) / max_bins;
  FeatureBins bins;
  bins.bin_of.resize(n);
  std::size_t in_bin = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = col[order[k]];
    const bool new_value = k == 0 || v > col[order[k - 1]];
    if (k == 0 || (new_value && in_bin >= target)) {
      bins.low.push_back(v);
      bins.high.push_back(v);
      in_bin = 0;
    }
    bins.high.back() = v;
    bins.bin_of[order[k]] = static_cast<std::uint16_t>(bins.low.size() - 1);
    ++in_bin;
  }
  return bins;
}

}  // namespace

GbtRegressor GbtRegressor::fit(const FeatureMatrix& x, std::span<const double> y, GbtLoss loss,
                               const GbtParams& params, double tau) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n == 0 || y.size() != n) throw Error(ErrorCode::kEmptyData, "gbt training set is empty or misaligned");
  if (params.trees < 0 || params.depth < 1 || params.learning_rate <= 0 || params.min_leaf < 1) {
    throw Error(ErrorCode::kBadConfig, "gbt hyperparameters must be positive");
  }

  GbtRegressor model;
  switch (loss) {
    case GbtLoss::kSquared: model.base_ = mean(y); break;
    case GbtLoss::kLogistic: {
      const double p = std::clamp(mean(y), 1e-6, 1.0 - 1e-6);
      model.base_ = std::log(p / (1.0 - p));
      break;
    }
    case GbtLoss::kPinball: model.base_ = empirical_quantile(std::vector<double>(y.begin(), y.end()), tau); break;
  }

  std::vector<double> f(n, model.base_);
  model.training_loss_.push_back(mean_loss(y, f, loss, tau));

  std::vector<FeatureBins> bins(d);
  std::vector<std::size_t> bin_offset(d + 1, 0);
  for (std::size_t j = 0; j < d; ++j) {
    bins[j] = make_bins(x.column(j), kMaxBins);
    bin_offset[j + 1] = bin_offset[j] + bins[j].low.size();
  }
  const std::size_t total_bins = bin_offset[d];

  const auto min_leaf = static_cast<std::size_t>(params.min_leaf);
  const std::size_t max_nodes = (std::size_t{2} << params.depth);
  std::vector<double> grad(n), hess(n);
  std::vector<int> node_of(n);
  std::vector<Node> tree;
  std::vector<NodeStats> total, hist;
  std::vector<int> slot_of;
  std::vector<int> frontier, next, open_nodes;
  std::vector<SplitCandidate> best;
  std::vector<std::vector<double>> residuals;
  model.nodes_.reserve(static_cast<std::size_t>(params.trees) * max_nodes);

  for (int round = 0; round < params.trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      switch (loss) {
        case GbtLoss::kSquared:
          grad[i] = y[i] - f[i];
          hess[i] = 1.0;
          break;
        case GbtLoss::kLogistic: {
          const double p = sigmoid(f[i]);
          grad[i] = y[i] - p;
          hess[i] = p * (1.0 - p);
          break;
        }
        case GbtLoss::kPinball:
          grad[i] = (y[i] - f[i] < 0.0) ? tau - 1.0 : tau;
          hess[i] = 1.0;
          break;
      }
    }

    // Local node ids: 0 is the root; children appended as splits happen.
    tree.assign(1, Node{});
    std::fill(node_of.begin(), node_of.end(), 0);
    frontier.assign(1, 0);

    for (int level = 0; level < params.depth && !frontier.empty(); ++level) {
      total.assign(tree.size(), NodeStats{});
      for (std::size_t i = 0; i < n; ++i) {
        auto& s = total[static_cast<std::size_t>(node_of[i])];
        s.g += grad[i];
        s.h += hess[i];
        ++s.count;
      }
      slot_of.assign(tree.size(), -1);
      open_nodes.clear();
      for (int node : frontier) {
        if (total[static_cast<std::size_t>(node)].count >= 2 * min_leaf) {
          slot_of[static_cast<std::size_t>(node)] = static_cast<int>(open_nodes.size());
          open_nodes.push_back(node);
        }
      }
      best.assign(tree.size(), SplitCandidate{});
      if (!open_nodes.empty()) {
        hist.assign(open_nodes.size() * total_bins, NodeStats{});
        for (std::size_t i = 0; i < n; ++i) {
          const int slot = slot_of[static_cast<std::size_t>(node_of[i])];
          if (slot < 0) continue;
          NodeStats* base = hist.data() + static_cast<std::size_t>(slot) * total_bins;
          for (std::size_t j = 0; j < d; ++j) {
            auto& s = base[bin_offset[j] + bins[j].bin_of[i]];
            s.g += grad[i];
            s.h += hess[i];
            ++s.count;
          }
        }
        for (std::size_t slot = 0; slot < open_nodes.size(); ++slot) {
          const auto node = static_cast<std::size_t>(open_nodes[slot]);
          const auto& t = total[node];
          const double parent = t.g * t.g / (t.h + kHessianFloor);
          for (std::size_t j = 0; j < d; ++j) {
            const NodeStats* h = hist.data() + slot * total_bins + bin_offset[j];
            const std::size_t nb = bins[j].low.size();
            NodeStats l;
            // Candidate split between bin b-1 and the next nonempty bin b.
            std::size_t prev = nb;
            for (std::size_t b = 0; b < nb; ++b) {
              if (h[b].count == 0) continue;
              if (prev < nb && l.count >= min_leaf && t.count - l.count >= min_leaf) {
                const double gr = t.g - l.g;
                const double hr = t.h - l.h;
                const double gain = l.g * l.g / (l.h + kHessianFloor) + gr * gr / (hr + kHessianFloor) - parent;
                if (gain > best[node].gain) {
                  best[node].gain = gain;
                  best[node].feature = static_cast<int>(j);
                  best[node].threshold = 0.5 * (bins[j].high[prev] + bins[j].low[b]);
                }
              }
              l.g += h[b].g;
              l.h += h[b].h;
              l.count += h[b].count;
              prev = b;
            }
          }
        }
      }

      next.clear();
      for (int node : frontier) {
        const auto& cand = best[static_cast<std::size_t>(node)];
        if (cand.feature < 0 || tree.size() + 2 > max_nodes) continue;
        const int left_id = static_cast<int>(tree.size());
        tree.push_back({});
        tree.push_back({});
        auto& parent = tree[static_cast<std::size_t>(node)];
        parent.feature = cand.feature;
        parent.threshold = cand.threshold;
        parent.left = left_id;
        parent.right = left_id + 1;
        next.push_back(left_id);
        next.push_back(left_id + 1);
      }
      if (next.empty()) break;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& node = tree[static_cast<std::size_t>(node_of[i])];
        if (node.feature >= 0) {
          node_of[i] = x.at(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
        }
      }
      std::swap(frontier, next);
    }

    // Leaf values.
    total.assign(tree.size(), NodeStats{});
    if (loss == GbtLoss::kPinball) {
      residuals.resize(tree.size());
      for (auto& r : residuals) r.clear();
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto node = static_cast<std::size_t>(node_of[i]);
      total[node].g += grad[i];
      total[node].h += hess[i];
      ++total[node].count;
      if (loss == GbtLoss::kPinball) residuals[node].push_back(y[i] - f[i]);
    }
    for (std::size_t k = 0; k < tree.size(); ++k) {
      if (tree[k].feature >= 0 || total[k].count == 0) continue;
      double step = 0.0;
      switch (loss) {
        case GbtLoss::kSquared: step = total[k].g / static_cast<double>(total[k].count); break;
        case GbtLoss::kLogistic:
          step = std::clamp(total[k].g / (total[k].h + kHessianFloor), -kMaxLogitStep, kMaxLogitStep);
          break;
        case GbtLoss::kPinball: step = empirical_quantile_inplace(residuals[k], tau); break;
      }
      tree[k].value = params.learning_rate * step;
    }
    for (std::size_t i = 0; i < n; ++i) f[i] += tree[static_cast<std::size_t>(node_of[i])].value;

    const int offset = static_cast<int>(model.nodes_.size());
    for (auto node : tree) {
      if (node.feature >= 0) {
        node.left += offset;
        node.right += offset;
      }
      model.nodes_.push_back(node);
    }
    model.tree_roots_.push_back(offset);
    model.training_loss_.push_back(mean_loss(y, f, loss, tau));
  }
  return model;
}

double GbtRegressor::predict(std::span<const double> x) const {
  double out = base_;
  for (int root : tree_roots_) {
    int k = root;
    while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
      const auto& node = nodes_[static_cast<std::size_t>(k)];
      k = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    out += nodes_[static_cast<std::size_t>(k)].value;
  }
  return out;
}

}  // namespace msmpolicy
