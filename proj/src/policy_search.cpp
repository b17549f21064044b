#include "msmpolicy/policy_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "msmpolicy/error.hpp"
#include "msmpolicy/parallel.hpp"
#include "msmpolicy/random.hpp"
#include "msmpolicy/stats.hpp"

namespace msmpolicy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- quadrant

struct QuadrantCandidate {
  double sum = -kInf;
  std::size_t count = 0;
  int s1 = 1;
  int s2 = 1;
  double t1 = 0.0;
  double t2 = 0.0;
};

bool preferred(const QuadrantCandidate& a, const QuadrantCandidate& b) {
  if (a.sum != b.sum) return a.sum > b.sum;
  if (a.count != b.count) return a.count < b.count;
  return std::tie(a.s1, a.s2, a.t1, a.t2) < std::tie(b.s1, b.s2, b.t1, b.t2);
}

/// Best suffix over ranks of the second feature. A suffix starting at b
/// covers ranks >= b.
class SuffixTree {
 public:
  struct Node {
    double total = 0.0;
    std::size_t total_count = 0;
    double best = -kInf;
    std::size_t best_count = 0;
    std::size_t best_start = 0;
  };

  SuffixTree(std::size_t leaves, bool prefer_late_start) : prefer_late_(prefer_late_start) {
    size_ = 1;
    while (size_ < leaves) size_ *= 2;
    nodes_.assign(2 * size_, Node{});
    for (std::size_t b = 0; b < size_; ++b) {
      Node& leaf = nodes_[size_ + b];
      leaf.best_start = b;
      leaf.best = b < leaves ? 0.0 : -kInf;
    }
    for (std::size_t v = size_ - 1; v >= 1; --v) pull(v);
  }

  void add(std::size_t rank, double g) {
    std::size_t v = size_ + rank;
    nodes_[v].total += g;
    nodes_[v].total_count += 1;
    nodes_[v].best = nodes_[v].total;
    nodes_[v].best_count = nodes_[v].total_count;
    for (v /= 2; v >= 1; v /= 2) pull(v);
  }

  const Node& root() const { return nodes_[1]; }

 private:
  bool better(double sa, std::size_t ca, std::size_t ba, double sb, std::size_t cb, std::size_t bb) const {
    if (sa != sb) return sa > sb;
    if (ca != cb) return ca < cb;
    return prefer_late_ ? ba > bb : ba < bb;
  }

  void pull(std::size_t v) {
    const Node& l = nodes_[2 * v];
    const Node& r = nodes_[2 * v + 1];
    Node& out = nodes_[v];
    out.total = l.total + r.total;
    out.total_count = l.total_count + r.total_count;
    const double extended = l.best + r.total;
    const std::size_t extended_count = l.best_count + r.total_count;
    if (better(extended, extended_count, l.best_start, r.best, r.best_count, r.best_start)) {
      out.best = extended;
      out.best_count = extended_count;
      out.best_start = l.best_start;
    } else {
      out.best = r.best;
      out.best_count = r.best_count;
      out.best_start = r.best_start;
    }
  }

  bool prefer_late_;
  std::size_t size_ = 1;
  std::vector<Node> nodes_;
};

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Threshold below rank `b` of `unique`: -inf, midpoints, +inf.
double cut_below(const std::vector<double>& unique, std::size_t b) {
  if (b == 0) return -kInf;
  if (b >= unique.size()) return kInf;
  return 0.5 * (unique[b - 1] + unique[b]);
}

std::size_t rank_of(const std::vector<double>& unique, double v) {
  return static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), v) - unique.begin());
}

QuadrantCandidate best_for_pattern(std::span<const double> gains, const CovariateRows& x, std::size_t f1,
                                   std::size_t f2, int s1, int s2) {
  const std::size_t n = gains.size();
  std::vector<double> u1(n);
  std::vector<double> u2(n);
  for (std::size_t i = 0; i < n; ++i) {
    u1[i] = s1 * x[i][f1];
    u2[i] = s2 * x[i][f2];
  }
  const auto uniq1 = sorted_unique(u1);
  const auto uniq2 = sorted_unique(u2);
  std::vector<std::size_t> r1(n);
  std::vector<std::size_t> r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    r1[i] = rank_of(uniq1, u1[i]);
    r2[i] = rank_of(uniq2, u2[i]);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r1[a] != r1[b] ? r1[a] > r1[b] : a < b;
  });
  // Original-scale t2 = s2 * cut, so s2 = -1 prefers later suffix starts.
  SuffixTree tree(uniq2.size(), s2 < 0);
  QuadrantCandidate best;
  std::size_t next = 0;
  for (std::size_t a = uniq1.size() + 1; a-- > 0;) {
    while (next < n && r1[order[next]] == a) {
      tree.add(r2[order[next]], gains[order[next]]);
      ++next;
    }
    QuadrantCandidate empty_suffix{0.0, 0, s1, s2, s1 * cut_below(uniq1, a), s2 * kInf};
    const auto& root = tree.root();
    QuadrantCandidate from_tree{root.best,
                                root.best_count,
                                s1,
                                s2,
                                s1 * cut_below(uniq1, a),
                                s2 * cut_below(uniq2, root.best_start)};
    const QuadrantCandidate& pick = preferred(from_tree, empty_suffix) ? from_tree : empty_suffix;
    if (preferred(pick, best)) best = pick;
  }
  return best;
}

// -------------------------------------------------------------------- tree

struct FeatureIndex {
  std::size_t feature = 0;
  std::vector<double> unique;
  std::vector<std::size_t> rank;   // per unit
  std::vector<std::size_t> order;  // units by value, then index
};

struct Subtree {
  double value = -kInf;
  int leaf_arm = 0;  // used when feature < 0
  int feature = -1;
  double threshold = 0.0;
  int left_arm = 0;
  int right_arm = 0;
};

int argmax_arm(const std::vector<double>& sums) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(sums.size()); ++a) {
    if (sums[static_cast<std::size_t>(a)] > sums[static_cast<std::size_t>(best)]) best = a;
  }
  return best;
}

class TreeSolver {
 public:
  TreeSolver(std::span<const double> gamma, int m, const CovariateRows& x, std::span<const std::size_t> features)
      : gamma_(gamma), m_(static_cast<std::size_t>(m)), n_(x.size()) {
    std::vector<std::size_t> sorted(features.begin(), features.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t f : sorted) {
      FeatureIndex idx;
      idx.feature = f;
      std::vector<double> v(n_);
      for (std::size_t i = 0; i < n_; ++i) v[i] = x[i][f];
      idx.unique = sorted_unique(v);
      idx.rank.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) idx.rank[i] = rank_of(idx.unique, v[i]);
      idx.order.resize(n_);
      std::iota(idx.order.begin(), idx.order.end(), 0);
      std::stable_sort(idx.order.begin(), idx.order.end(),
                       [&](std::size_t a, std::size_t b) { return idx.rank[a] < idx.rank[b]; });
      index_.push_back(std::move(idx));
    }
  }

  double g(std::size_t i, std::size_t a) const { return gamma_[i * m_ + a]; }

  /// Best leaf or single split restricted to units with member[i] != 0.
  Subtree best_depth1(const std::vector<char>& member) const {
    std::vector<double> total(m_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!member[i]) continue;
      for (std::size_t a = 0; a < m_; ++a) total[a] += g(i, a);
    }
    Subtree best;
    best.leaf_arm = argmax_arm(total);
    best.value = total[static_cast<std::size_t>(best.leaf_arm)];
    std::vector<double> left(m_);
    std::vector<double> right(m_);
    for (const auto& idx : index_) {
      std::fill(left.begin(), left.end(), 0.0);
      bool any = false;
      std::size_t last_rank = 0;
      for (std::size_t i : idx.order) {
        if (!member[i]) continue;
        if (any && idx.rank[i] != last_rank) {
          for (std::size_t a = 0; a < m_; ++a) right[a] = total[a] - left[a];
          const int la = argmax_arm(left);
          const int ra = argmax_arm(right);
          if (la != ra) {
            const double value = left[static_cast<std::size_t>(la)] + right[static_cast<std::size_t>(ra)];
            if (value > best.value) {
              best.value = value;
              best.feature = static_cast<int>(idx.feature);
              best.threshold = 0.5 * (idx.unique[last_rank] + idx.unique[last_rank + 1]);
              best.left_arm = la;
              best.right_arm = ra;
            }
          }
        }
        for (std::size_t a = 0; a < m_; ++a) left[a] += g(i, a);
        any = true;
        last_rank = idx.rank[i];
      }
    }
    return best;
  }

  const std::vector<FeatureIndex>& index() const { return index_; }
  std::size_t n() const { return n_; }

 private:
  std::span<const double> gamma_;
  std::size_t m_;
  std::size_t n_;
  std::vector<FeatureIndex> index_;
};

int append_subtree(std::vector<TreeNode>& nodes, const Subtree& s) {
  const int at = static_cast<int>(nodes.size());
  if (s.feature < 0) {
    TreeNode leaf;
    leaf.arm = s.leaf_arm;
    nodes.push_back(leaf);
    return at;
  }
  TreeNode split;
  split.feature = s.feature;
  split.threshold = s.threshold;
  split.left = at + 1;
  split.right = at + 2;
  nodes.push_back(split);
  TreeNode l;
  l.arm = s.left_arm;
  TreeNode r;
  r.arm = s.right_arm;
  nodes.push_back(l);
  nodes.push_back(r);
  return at;
}

/// Replaces splits whose two children are leaves with the same arm.
void collapse(std::vector<TreeNode>& nodes) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& node : nodes) {
      if (node.is_leaf()) continue;
      const auto& l = nodes[static_cast<std::size_t>(node.left)];
      const auto& r = nodes[static_cast<std::size_t>(node.right)];
      if (l.is_leaf() && r.is_leaf() && l.arm == r.arm) {
        const int arm = l.arm;
        node = TreeNode{};
        node.arm = arm;
        changed = true;
      }
    }
  }
  // Drop unreachable nodes and renumber.
  std::vector<TreeNode> out;
  std::vector<int> map(nodes.size(), -1);
  std::vector<int> queue{0};
  for (std::size_t k = 0; k < queue.size(); ++k) {
    const int old = queue[k];
    map[static_cast<std::size_t>(old)] = static_cast<int>(out.size());
    out.push_back(nodes[static_cast<std::size_t>(old)]);
    if (!nodes[static_cast<std::size_t>(old)].is_leaf()) {
      queue.push_back(nodes[static_cast<std::size_t>(old)].left);
      queue.push_back(nodes[static_cast<std::size_t>(old)].right);
    }
  }
  for (auto& node : out) {
    if (node.is_leaf()) continue;
    node.left = map[static_cast<std::size_t>(node.left)];
    node.right = map[static_cast<std::size_t>(node.right)];
  }
  nodes = std::move(out);
}

// ---------------------------------------------------------------- logistic

struct LogisticProblem {
  std::vector<std::vector<double>> t;  // transformed rows
  std::span<const double> gains;

  double value(const std::vector<double>& beta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += sigmoid(dot(t[i], beta)) * gains[i];
    return s / static_cast<double>(t.size());
  }

  double value_and_gradient(const std::vector<double>& beta, std::vector<double>& grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double p = sigmoid(dot(t[i], beta));
      s += p * gains[i];
      const double w = p * (1.0 - p) * gains[i];
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += w * t[i][k];
    }
    const double inv_n = 1.0 / static_cast<double>(t.size());
    for (double& v : grad) v *= inv_n;
    return s * inv_n;
  }

  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }
};

struct AscentRun {
  std::vector<double> beta;
  double initial = 0.0;
  double value = 0.0;
  bool converged = false;
};

AscentRun ascend(const LogisticProblem& problem, std::vector<double> beta, int max_iter, double grad_tol) {
  AscentRun run;
  std::vector<double> grad(beta.size());
  std::vector<double> trial(beta.size());
  double value = problem.value_and_gradient(beta, grad);
  run.initial = value;
  double step = 1.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    double norm2 = 0.0;
    for (double v : grad) norm2 += v * v;
    if (std::sqrt(norm2) < grad_tol) {
      run.converged = true;
      break;
    }
    bool accepted = false;
    while (step > 1e-20) {
      for (std::size_t k = 0; k < beta.size(); ++k) trial[k] = beta[k] + step * grad[k];
      const double trial_value = problem.value(trial);
      if (trial_value >= value + 1e-4 * step * norm2) {
        beta.swap(trial);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    value = problem.value_and_gradient(beta, grad);
    step *= 2.0;
  }
  if (!run.converged) {
    double norm2 = 0.0;
    for (double v : grad) norm2 += v * v;
    run.converged = std::sqrt(norm2) < grad_tol;
  }
  run.beta = std::move(beta);
  run.value = value;
  return run;
}

}  // namespace

QuadrantSearchResult quadrant_search(std::span<const double> gains, const CovariateRows& x, std::size_t f1,
                                     std::size_t f2) {
  if (gains.size() != x.size()) throw Error(ErrorCode::kDimensionMismatch, "gains and covariates differ in n");
  if (x.empty()) throw Error(ErrorCode::kEmptyData, "quadrant search needs at least one unit");
  if (f1 == f2 || f1 >= x[0].size() || f2 >= x[0].size()) {
    throw Error(ErrorCode::kNeedTwoFeatures, "quadrant search needs two distinct features");
  }
  QuadrantSearchResult best;
  bool have = false;
  QuadrantCandidate best_key;
  for (int s1 : {-1, 1}) {
    for (int s2 : {-1, 1}) {
      const QuadrantCandidate c = best_for_pattern(gains, x, f1, f2, s1, s2);
      QuadrantSearchResult r;
      r.policy = QuadrantPolicy{f1, f2, c.s1, c.s2, c.t1, c.t2};
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (r.policy.treats(x[i])) {
          r.objective += gains[i];
          ++r.treated;
        }
      }
      const QuadrantCandidate key{r.objective, r.treated, c.s1, c.s2, c.t1, c.t2};
      if (!have || preferred(key, best_key)) {
        best = r;
        best_key = key;
        have = true;
      }
    }
  }
  return best;
}

TreeSearchResult tree_search(std::span<const double> gamma, int m, const CovariateRows& x,
                             std::span<const std::size_t> features, int depth) {
  if (depth != 1 && depth != 2) throw Error(ErrorCode::kBadDepth, "tree depth must be 1 or 2");
  if (m < 1 || gamma.size() != x.size() * static_cast<std::size_t>(m)) {
    throw Error(ErrorCode::kDimensionMismatch, "score matrix does not match n x m");
  }
  if (x.empty()) throw Error(ErrorCode::kEmptyData, "tree search needs at least one unit");
  for (std::size_t f : features) {
    if (f >= x[0].size()) throw Error(ErrorCode::kDimensionMismatch, "tree feature index out of range");
  }
  const TreeSolver solver(gamma, m, x, features);
  const std::size_t n = x.size();
  std::vector<char> all(n, 1);
  const Subtree shallow = solver.best_depth1(all);
  std::vector<TreeNode> nodes;
  append_subtree(nodes, shallow);

  if (depth == 2) {
    double best_value = shallow.value;
    std::vector<char> left(n);
    std::vector<char> right(n);
    for (const auto& idx : solver.index()) {
      for (std::size_t r = 0; r + 1 < idx.unique.size(); ++r) {
        for (std::size_t i = 0; i < n; ++i) {
          left[i] = idx.rank[i] <= r ? 1 : 0;
          right[i] = static_cast<char>(1 - left[i]);
        }
        const Subtree l = solver.best_depth1(left);
        const Subtree rt = solver.best_depth1(right);
        const double value = l.value + rt.value;
        if (value > best_value) {
          best_value = value;
          nodes.clear();
          TreeNode root;
          root.feature = static_cast<int>(idx.feature);
          root.threshold = 0.5 * (idx.unique[r] + idx.unique[r + 1]);
          nodes.push_back(root);
          nodes[0].left = append_subtree(nodes, l);
          nodes[0].right = append_subtree(nodes, rt);
        }
      }
    }
  }
  collapse(nodes);
  TreeSearchResult out;
  out.policy.nodes = std::move(nodes);
  const auto mm = static_cast<std::size_t>(m);
  for (std::size_t i = 0; i < n; ++i) {
    out.objective += gamma[i * mm + static_cast<std::size_t>(out.policy.arm_at(x[i]))];
  }
  return out;
}

LogisticSearchResult logistic_ascent(std::span<const double> gains, const CovariateRows& x,
                                     std::span<const std::size_t> features, Basis basis,
                                     const LogisticSearchOptions& options) {
  if (gains.size() != x.size()) throw Error(ErrorCode::kDimensionMismatch, "gains and covariates differ in n");
  if (x.empty()) throw Error(ErrorCode::kEmptyData, "logistic search needs at least one unit");
  if (options.restarts < 0 || options.max_iter < 0) throw Error(ErrorCode::kBadConfig, "negative restart count");
  for (std::size_t f : features) {
    if (f >= x[0].size()) throw Error(ErrorCode::kDimensionMismatch, "logistic feature index out of range");
  }
  LogisticProblem problem;
  problem.gains = gains;
  problem.t.reserve(x.size());
  for (const auto& row : x) problem.t.push_back(basis_expand(row, features, basis));
  const std::size_t p = problem.t[0].size();

  const auto runs_count = static_cast<std::size_t>(options.restarts) + 1;
  std::vector<AscentRun> runs(runs_count);
  parallel_for(runs_count, options.threads, [&](std::size_t r) {
    std::vector<double> start(p, 0.0);
    if (r > 0) {
      Rng rng(mix_seed(options.seed, r));
      for (double& v : start) v = rng.uniform(-1.0, 1.0);
    }
    runs[r] = ascend(problem, std::move(start), options.max_iter, options.grad_tol);
  });

  LogisticSearchResult out;
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs_count; ++r) {
    out.initial_values.push_back(runs[r].initial);
    out.restart_values.push_back(runs[r].value);
    if (runs[r].value > runs[best].value) best = r;
  }
  out.policy.features.assign(features.begin(), features.end());
  out.policy.basis = basis;
  out.policy.beta = runs[best].beta;
  out.objective = runs[best].value;
  out.converged = runs[best].converged;
  return out;
}

}  // namespace msmpolicy
