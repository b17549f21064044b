#include "msmpolicy/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msmpolicy/error.hpp"
#include "msmpolicy/stats.hpp"

namespace msmpolicy {

bool QuadrantPolicy::treats(std::span<const double> x) const {
  const bool first = s1 > 0 ? x[i] > t1 : x[i] < t1;
  const bool second = s2 > 0 ? x[j] > t2 : x[j] < t2;
  return first && second;
}

int TreePolicy::arm_at(std::span<const double> x) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].arm;
}

int TreePolicy::depth() const {
  // iterative DFS over (node, depth)
  int best = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [node, depth] = stack.back();
    stack.pop_back();
    const auto& n = nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) {
      best = std::max(best, depth);
    } else {
      stack.emplace_back(n.left, depth + 1);
      stack.emplace_back(n.right, depth + 1);
    }
  }
  return best;
}

std::string_view to_string(Basis basis) {
  return basis == Basis::kIdentity ? "identity" : "quadratic";
}

Basis basis_from_string(std::string_view name) {
  if (name == "identity") return Basis::kIdentity;
  if (name == "quadratic") return Basis::kQuadratic;
  throw Error(ErrorCode::kBadConfig, "unknown basis '" + std::string(name) + "'");
}

std::vector<double> basis_expand(std::span<const double> x, std::span<const std::size_t> features,
                                 Basis basis) {
  std::vector<double> t;
  t.reserve(1 + features.size() * (features.size() + 3) / 2);
  t.push_back(1.0);
  for (std::size_t f : features) t.push_back(x[f]);
  if (basis == Basis::kQuadratic) {
    for (std::size_t a = 0; a < features.size(); ++a) {
      for (std::size_t b = a; b < features.size(); ++b) t.push_back(x[features[a]] * x[features[b]]);
    }
  }
  return t;
}

double LogisticPolicy::treat_probability(std::span<const double> x) const {
  // Same term order as basis_expand, without building T(x).
  double z = beta[0];
  std::size_t k = 1;
  for (std::size_t f : features) z += beta[k++] * x[f];
  if (basis == Basis::kQuadratic) {
    for (std::size_t a = 0; a < features.size(); ++a) {
      for (std::size_t b = a; b < features.size(); ++b) z += beta[k++] * (x[features[a]] * x[features[b]]);
    }
  }
  return sigmoid(z);
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kConstant: return "constant";
    case PolicyKind::kQuadrant: return "quadrant";
    case PolicyKind::kTree: return "tree";
    case PolicyKind::kLogistic: return "logistic";
  }
  return "unknown";
}

namespace {

void check_simplex(const std::vector<double>& p, int m) {
  if (p.size() != static_cast<std::size_t>(m)) {
    throw Error(ErrorCode::kDimensionMismatch, "constant policy probability length != m");
  }
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kBadConfig, "probability outside [0,1]");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw Error(ErrorCode::kBadConfig, "probabilities do not sum to 1");
}

std::size_t logistic_width(const LogisticPolicy& p) {
  const std::size_t f = p.features.size();
  return p.basis == Basis::kIdentity ? 1 + f : 1 + f + f * (f + 1) / 2;
}

nlohmann::json threshold_to_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

double threshold_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::kBadConfig, "bad threshold '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

Policy::Policy(Rule rule, int m) : rule_(std::move(rule)), m_(m) {
  if (m < 2) throw Error(ErrorCode::kBadConfig, "policy needs m >= 2");
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantPolicy>) {
          check_simplex(r.probabilities, m);
        } else if constexpr (std::is_same_v<T, QuadrantPolicy>) {
          if (m != 2) throw Error(ErrorCode::kUnsupportedClassForArms, "quadrant policies are binary");
          if (r.i == r.j) throw Error(ErrorCode::kNeedTwoFeatures, "quadrant features must differ");
          if ((r.s1 != 1 && r.s1 != -1) || (r.s2 != 1 && r.s2 != -1)) {
            throw Error(ErrorCode::kBadConfig, "quadrant signs must be +-1");
          }
        } else if constexpr (std::is_same_v<T, TreePolicy>) {
          if (r.nodes.empty()) throw Error(ErrorCode::kBadConfig, "tree has no nodes");
          for (const auto& n : r.nodes) {
            if (n.is_leaf()) {
              if (n.arm < 0 || n.arm >= m) throw Error(ErrorCode::kArmOutOfRange, "tree leaf arm");
            } else {
              const auto size = static_cast<int>(r.nodes.size());
              if (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size || !std::isfinite(n.threshold)) {
                throw Error(ErrorCode::kBadConfig, "malformed tree node");
              }
            }
          }
        } else {
          if (m != 2) throw Error(ErrorCode::kUnsupportedClassForArms, "logistic policies are binary");
          if (r.beta.size() != logistic_width(r)) {
            throw Error(ErrorCode::kDimensionMismatch, "logistic beta length does not match basis");
          }
          for (double b : r.beta) {
            if (!std::isfinite(b)) throw Error(ErrorCode::kNonFinite, "logistic coefficient");
          }
        }
      },
      rule_);
}

Policy Policy::always(int arm, int m) {
  std::vector<double> p(static_cast<std::size_t>(m), 0.0);
  p.at(static_cast<std::size_t>(arm)) = 1.0;
  return Policy(ConstantPolicy{std::move(p)}, m);
}

Policy Policy::constant_treat_probability(double p) {
  return Policy(ConstantPolicy{{1.0 - p, p}}, 2);
}

PolicyKind Policy::kind() const noexcept {
  return static_cast<PolicyKind>(rule_.index());
}

std::size_t Policy::required_dimension() const {
  return std::visit(
      [](const auto& r) -> std::size_t {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantPolicy>) {
          return 0;
        } else if constexpr (std::is_same_v<T, QuadrantPolicy>) {
          return std::max(r.i, r.j) + 1;
        } else if constexpr (std::is_same_v<T, TreePolicy>) {
          std::size_t d = 0;
          for (const auto& n : r.nodes) {
            if (!n.is_leaf()) d = std::max(d, static_cast<std::size_t>(n.feature) + 1);
          }
          return d;
        } else {
          std::size_t d = 0;
          for (std::size_t f : r.features) d = std::max(d, f + 1);
          return d;
        }
      },
      rule_);
}

std::vector<double> Policy::assign_probabilities(std::span<const double> x) const {
  if (x.size() < required_dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "covariate vector of length " + std::to_string(x.size()) +
                                                   " is shorter than the policy requires");
  }
  std::vector<double> p(static_cast<std::size_t>(m_), 0.0);
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantPolicy>) {
          p = r.probabilities;
        } else if constexpr (std::is_same_v<T, QuadrantPolicy>) {
          p[r.treats(x) ? 1 : 0] = 1.0;
        } else if constexpr (std::is_same_v<T, TreePolicy>) {
          p[static_cast<std::size_t>(r.arm_at(x))] = 1.0;
        } else {
          const double t = r.treat_probability(x);
          p[0] = 1.0 - t;
          p[1] = t;
        }
      },
      rule_);
  return p;
}

double Policy::treat_probability(std::span<const double> x) const {
  if (m_ != 2) throw Error(ErrorCode::kNotBinary, "treat_probability needs a binary policy");
  if (x.size() < required_dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "covariate vector of length " + std::to_string(x.size()) +
                                                   " is shorter than the policy requires");
  }
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantPolicy>) {
          return r.probabilities[1];
        } else if constexpr (std::is_same_v<T, QuadrantPolicy>) {
          return r.treats(x) ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, TreePolicy>) {
          return r.arm_at(x) == 1 ? 1.0 : 0.0;
        } else {
          return r.treat_probability(x);
        }
      },
      rule_);
}

nlohmann::json Policy::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind());
  j["m"] = m_;
  nlohmann::json params = nlohmann::json::object();
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantPolicy>) {
          params["probabilities"] = r.probabilities;
        } else if constexpr (std::is_same_v<T, QuadrantPolicy>) {
          params["i"] = r.i;
          params["j"] = r.j;
          params["s1"] = r.s1;
          params["s2"] = r.s2;
          params["t1"] = threshold_to_json(r.t1);
          params["t2"] = threshold_to_json(r.t2);
        } else if constexpr (std::is_same_v<T, TreePolicy>) {
          auto nodes = nlohmann::json::array();
          for (const auto& n : r.nodes) {
            if (n.is_leaf()) {
              nodes.push_back({{"leaf", n.arm}});
            } else {
              nodes.push_back({{"feat", n.feature}, {"thr", n.threshold}, {"left", n.left}, {"right", n.right}});
            }
          }
          params["nodes"] = std::move(nodes);
        } else {
          params["beta"] = r.beta;
          params["basis"] = to_string(r.basis);
          params["features"] = r.features;
        }
      },
      rule_);
  j["params"] = std::move(params);
  return j;
}

Policy Policy::from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    const int m = j.at("m").get<int>();
    const auto& params = j.at("params");
    if (kind == "constant") {
      return Policy(ConstantPolicy{params.at("probabilities").get<std::vector<double>>()}, m);
    }
    if (kind == "quadrant") {
      QuadrantPolicy q;
      q.i = params.at("i").get<std::size_t>();
      q.j = params.at("j").get<std::size_t>();
      q.s1 = params.at("s1").get<int>();
      q.s2 = params.at("s2").get<int>();
      q.t1 = threshold_from_json(params.at("t1"));
      q.t2 = threshold_from_json(params.at("t2"));
      return Policy(q, m);
    }
    if (kind == "tree") {
      TreePolicy t;
      for (const auto& node : params.at("nodes")) {
        TreeNode n;
        if (node.contains("leaf")) {
          n.arm = node.at("leaf").get<int>();
        } else {
          n.feature = node.at("feat").get<int>();
          n.threshold = node.at("thr").get<double>();
          n.left = node.at("left").get<int>();
          n.right = node.at("right").get<int>();
        }
        t.nodes.push_back(n);
      }
      return Policy(std::move(t), m);
    }
    if (kind == "logistic") {
      LogisticPolicy l;
      l.beta = params.at("beta").get<std::vector<double>>();
      l.basis = basis_from_string(params.value("basis", std::string("identity")));
      if (params.contains("features")) {
        l.features = params.at("features").get<std::vector<std::size_t>>();
      } else {
        for (std::size_t f = 0; f + 1 < l.beta.size(); ++f) l.features.push_back(f);
      }
      return Policy(std::move(l), m);
    }
    throw Error(ErrorCode::kBadConfig, "unknown policy kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("malformed policy JSON: ") + e.what());
  }
}

}  // namespace msmpolicy
