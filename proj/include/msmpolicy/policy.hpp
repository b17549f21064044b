#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace msmpolicy {

/// Same arm distribution at every x.
struct ConstantPolicy {
  std::vector<double> probabilities;
};

/// Treats iff s1*(x[i]-t1) > 0 and s2*(x[j]-t2) > 0. Thresholds may be +-inf.
struct QuadrantPolicy {
  std::size_t i = 0;
  std::size_t j = 1;
  int s1 = 1;
  int s2 = 1;
  double t1 = 0.0;
  double t2 = 0.0;

  bool treats(std::span<const double> x) const;
};

/// Internal nodes route x[feature] <= threshold to `left`.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int arm = -1;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct TreePolicy {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int arm_at(std::span<const double> x) const;
  int depth() const;
};

enum class Basis { kIdentity, kQuadratic };

std::string_view to_string(Basis basis);
Basis basis_from_string(std::string_view name);

/// Transformed covariates T(x): intercept, selected features, and for the
/// quadratic basis all pairwise products (i <= j) of the selected features.
std::vector<double> basis_expand(std::span<const double> x, std::span<const std::size_t> features,
                                 Basis basis);

/// pi(1|x) = sigmoid(T(x)'beta).
struct LogisticPolicy {
  std::vector<std::size_t> features;
  Basis basis = Basis::kIdentity;
  std::vector<double> beta;

  double treat_probability(std::span<const double> x) const;
};

enum class PolicyKind { kConstant, kQuadrant, kTree, kLogistic };

std::string_view to_string(PolicyKind kind);

/// Decision rule mapping covariates to a probability vector over m arms.
class Policy {
 public:
  using Rule = std::variant<ConstantPolicy, QuadrantPolicy, TreePolicy, LogisticPolicy>;

  Policy(Rule rule, int m);

  static Policy always(int arm, int m);
  static Policy constant_treat_probability(double p);

  PolicyKind kind() const noexcept;
  int m() const noexcept { return m_; }
  const Rule& rule() const noexcept { return rule_; }

  /// Length-m simplex vector. Throws DimensionMismatch when x is too short
  /// for the features the rule reads.
  std::vector<double> assign_probabilities(std::span<const double> x) const;

  /// pi(1|x) for binary policies. Throws NotBinary when m != 2.
  double treat_probability(std::span<const double> x) const;

  /// Smallest covariate dimension the rule can be evaluated on.
  std::size_t required_dimension() const;

  nlohmann::json to_json() const;
  static Policy from_json(const nlohmann::json& j);

 private:
  Rule rule_;
  int m_;
};

}  // namespace msmpolicy
