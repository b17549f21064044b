#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "msmpolicy/error.hpp"

namespace msmpolicy::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kBadConfig, what); }

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::set<std::string> common{"seed", "threads", "out_dir"};
  static const std::set<std::string> nuisance{"learner", "folds", "gbt", "knn_neighbors", "clip_kappa", "dgp"};
  static const std::set<std::string> data{"data", "m", "treated_cost"};
  static const auto merge = [](std::initializer_list<std::set<std::string>> parts) {
    std::set<std::string> out;
    for (const auto& p : parts) out.insert(p.begin(), p.end());
    return out;
  };
  static const std::map<std::string, std::set<std::string>> keys{
      {"simulate", merge({common, {"n", "dgp"}})},
      {"fit", merge({common, nuisance, data, {"method", "log_lambda", "policy"}})},
      {"evaluate", merge({common, nuisance, data, {"policy_file", "baseline_file", "log_lambda"}})},
      {"bounds", merge({common, nuisance, data, {"log_lambda_grid"}})},
      {"sweep", merge({common, nuisance,
                       {"log_lambda_grid", "methods", "reps", "n", "eval_n", "policy", "regret_restarts",
                        "regret_max_iter"}})},
      {"selfcheck", common},
  };
  return keys;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) bad(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) bad("unknown key '" + key + "' in " + where);
  }
}

double get_double(const json& j, const std::string& key) {
  if (!j.is_number()) bad("'" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad("'" + key + "' must be finite");
  return v;
}

long long get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) bad("'" + key + "' must be an integer");
  return j.get<long long>();
}

int get_positive_int(const json& j, const std::string& key) {
  const long long v = get_int(j, key);
  if (v < 1 || v > std::numeric_limits<int>::max()) bad("'" + key + "' must be a positive integer");
  return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) bad("'" + key + "' must be a string");
  return j.get<std::string>();
}

std::vector<double> get_doubles(const json& j, const std::string& key) {
  if (!j.is_array()) bad("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_double(v, key));
  return out;
}

template <std::size_t N>
std::array<double, N> get_fixed(const json& j, const std::string& key) {
  const auto v = get_doubles(j, key);
  if (v.size() != N) bad("'" + key + "' must have " + std::to_string(N) + " entries");
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

std::uint64_t get_seed(const json& j) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    bad("'seed' must be a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

void parse_gbt(const json& j, GbtParams& gbt) {
  reject_unknown(j, {"trees", "depth", "learning_rate", "min_leaf"}, "gbt");
  if (j.contains("trees")) gbt.trees = get_positive_int(j["trees"], "gbt.trees");
  if (j.contains("depth")) gbt.depth = get_positive_int(j["depth"], "gbt.depth");
  if (j.contains("learning_rate")) {
    gbt.learning_rate = get_double(j["learning_rate"], "gbt.learning_rate");
    if (gbt.learning_rate <= 0.0) bad("'gbt.learning_rate' must be positive");
  }
  if (j.contains("min_leaf")) gbt.min_leaf = get_positive_int(j["min_leaf"], "gbt.min_leaf");
}

void parse_dgp(const json& j, DgpConfig& dgp) {
  reject_unknown(j,
                 {"log_lambda_star", "mu_x", "theta", "beta_cons", "beta_a", "beta_x", "beta_xa", "beta_u",
                  "noise_sd"},
                 "dgp");
  if (j.contains("log_lambda_star")) dgp.log_lambda_star = get_double(j["log_lambda_star"], "dgp.log_lambda_star");
  if (j.contains("mu_x")) dgp.mu_x = get_fixed<2>(j["mu_x"], "dgp.mu_x");
  if (j.contains("theta")) dgp.theta = get_fixed<6>(j["theta"], "dgp.theta");
  if (j.contains("beta_cons")) dgp.beta_cons = get_double(j["beta_cons"], "dgp.beta_cons");
  if (j.contains("beta_a")) dgp.beta_a = get_double(j["beta_a"], "dgp.beta_a");
  if (j.contains("beta_x")) dgp.beta_x = get_fixed<2>(j["beta_x"], "dgp.beta_x");
  if (j.contains("beta_xa")) dgp.beta_xa = get_fixed<2>(j["beta_xa"], "dgp.beta_xa");
  if (j.contains("beta_u")) dgp.beta_u = get_double(j["beta_u"], "dgp.beta_u");
  if (j.contains("noise_sd")) dgp.noise_sd = get_double(j["noise_sd"], "dgp.noise_sd");
  dgp.validate();
}

void parse_policy(const json& j, PolicyClassSpec& spec) {
  reject_unknown(j, {"class", "features", "depth", "basis", "restarts", "max_iter"}, "policy");
  if (j.contains("class")) spec.cls = policy_class_from_string(get_string(j["class"], "policy.class"));
  if (j.contains("features")) {
    if (!j["features"].is_array()) bad("'policy.features' must be an array of column indices");
    spec.features.clear();
    for (const auto& f : j["features"]) {
      const long long v = get_int(f, "policy.features");
      if (v < 0) bad("'policy.features' entries must be nonnegative");
      spec.features.push_back(static_cast<std::size_t>(v));
    }
  }
  if (j.contains("depth")) spec.depth = get_positive_int(j["depth"], "policy.depth");
  if (j.contains("basis")) spec.basis = basis_from_string(get_string(j["basis"], "policy.basis"));
  if (j.contains("restarts")) {
    const long long v = get_int(j["restarts"], "policy.restarts");
    if (v < 0 || v > 100000) bad("'policy.restarts' must be in [0, 100000]");
    spec.restarts = static_cast<int>(v);
  }
  if (j.contains("max_iter")) spec.max_iter = get_positive_int(j["max_iter"], "policy.max_iter");
  if (spec.cls == PolicyClass::kTree && spec.depth > 2) bad("tree depth must be 1 or 2");
}

LearnerKind learner_from_string(const std::string& name) {
  if (name == "gbt") return LearnerKind::kGbt;
  if (name == "knn") return LearnerKind::kKnn;
  if (name == "oracle") return LearnerKind::kOracle;
  bad("unknown learner '" + name + "' (expected gbt, knn or oracle)");
}

// Expects rc.dgp to be parsed already; the oracle learner is built from it.
void parse_nuisance(const json& j, RunConfig& rc) {
  auto& spec = rc.nuisance;
  if (j.contains("learner")) spec.learner = learner_from_string(get_string(j["learner"], "learner"));
  if (j.contains("folds")) spec.folds = get_positive_int(j["folds"], "folds");
  if (j.contains("gbt")) parse_gbt(j["gbt"], spec.gbt);
  if (j.contains("knn_neighbors")) spec.knn_neighbors = static_cast<std::size_t>(get_positive_int(j["knn_neighbors"], "knn_neighbors"));
  if (j.contains("clip_kappa")) {
    spec.clip_kappa = get_double(j["clip_kappa"], "clip_kappa");
    if (spec.clip_kappa <= 0.0 || spec.clip_kappa >= 0.5) bad("'clip_kappa' must be in (0, 0.5)");
  }
  if (spec.folds < 2) bad("'folds' must be at least 2");
  if (spec.learner == LearnerKind::kOracle) spec.oracle = std::make_shared<DgpOracle>(rc.dgp);
}

std::vector<double> default_sweep_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 35; ++k) grid.push_back(k / 10.0);
  return grid;
}

std::vector<double> parse_grid(const json& j) {
  auto grid = get_doubles(j, "log_lambda_grid");
  if (grid.empty()) bad("'log_lambda_grid' must not be empty");
  for (double g : grid) {
    if (g < 0.0) bad("'log_lambda_grid' entries must be nonnegative");
  }
  return grid;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"simulate", "fit", "evaluate", "bounds", "sweep", "selfcheck"};
  return names;
}

nlohmann::json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadConfig, "cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    bad("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::optional<int> threads_from_env() {
  const char* raw = std::getenv("MSMPOLICY_THREADS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) return std::nullopt;
  return static_cast<int>(v);
}

RunConfig make_run_config(const std::string& command, const nlohmann::json& file, const std::filesystem::path& base_dir,
                          const Flags& flags) {
  const auto& keys = allowed_keys();
  const auto it = keys.find(command);
  if (it == keys.end()) bad("unknown command '" + command + "'");
  reject_unknown(file, it->second, "config");

  RunConfig rc;
  rc.command = command;
  const bool is_sweep = command == "sweep";
  if (is_sweep) {
    // Lighter learners than the single-fit defaults; the sweep fits
    // thousands of nuisance sets.
    rc.nuisance.folds = 5;
    rc.nuisance.gbt.trees = 100;
    rc.nuisance.gbt.learning_rate = 0.2;
    rc.policy.cls = PolicyClass::kLogistic;
    rc.policy.restarts = 5;
    rc.policy.max_iter = 200;
    rc.n = 2000;
  }

  if (file.contains("seed")) rc.seed = get_seed(file["seed"]);
  if (file.contains("threads")) rc.threads = get_positive_int(file["threads"], "threads");
  else if (auto env = threads_from_env()) rc.threads = *env;
  if (file.contains("out_dir")) rc.out_dir = resolve(get_string(file["out_dir"], "out_dir"), base_dir);

  if (file.contains("dgp")) parse_dgp(file["dgp"], rc.dgp);
  if (command == "fit" || command == "evaluate" || command == "bounds" || is_sweep) parse_nuisance(file, rc);

  if (command == "fit" || command == "evaluate" || command == "bounds") {
    if (!file.contains("data")) bad("'data' is required for " + command);
    rc.data = resolve(get_string(file["data"], "data"), base_dir);
    if (file.contains("m")) {
      const long long m = get_int(file["m"], "m");
      if (m < 2 || m > 64) bad("'m' must be in [2, 64]");
      rc.m = static_cast<int>(m);
    }
    if (file.contains("treated_cost")) {
      const auto& c = file["treated_cost"];
      if (c.is_number()) {
        rc.treated_cost.assign(static_cast<std::size_t>(rc.m), get_double(c, "treated_cost"));
        rc.treated_cost[0] = 0.0;
      } else {
        rc.treated_cost = get_doubles(c, "treated_cost");
        if (rc.treated_cost.size() != static_cast<std::size_t>(rc.m)) bad("'treated_cost' needs one entry per arm");
      }
    }
  }
  if (file.contains("log_lambda")) {
    rc.log_lambda = get_double(file["log_lambda"], "log_lambda");
    if (rc.log_lambda < 0.0) bad("'log_lambda' must be nonnegative");
  }
  if (file.contains("method")) rc.method = method_from_string(get_string(file["method"], "method"));
  if (file.contains("policy")) parse_policy(file["policy"], rc.policy);
  if (file.contains("n")) rc.n = static_cast<std::size_t>(get_positive_int(file["n"], "n"));

  if (command == "evaluate") {
    if (!file.contains("policy_file")) bad("'policy_file' is required for evaluate");
    rc.policy_file = resolve(get_string(file["policy_file"], "policy_file"), base_dir);
    if (file.contains("baseline_file")) {
      rc.baseline_file = resolve(get_string(file["baseline_file"], "baseline_file"), base_dir);
    }
  }
  if (command == "bounds") {
    rc.log_lambda_grid = file.contains("log_lambda_grid") ? parse_grid(file["log_lambda_grid"]) : std::vector<double>{0.0};
  }

  if (flags.seed) rc.seed = *flags.seed;
  if (flags.threads) rc.threads = *flags.threads;
  if (flags.out_dir) rc.out_dir = *flags.out_dir;
  rc.smoke = flags.smoke;
  rc.with_truth = flags.with_truth;
  rc.flip_sign = flags.flip_sign;
  if (rc.threads < 1) bad("thread count must be positive");
  rc.nuisance.threads = rc.threads;

  if (is_sweep) {
    auto& s = rc.sweep;
    s.dgp = rc.dgp;
    s.log_lambda_grid = file.contains("log_lambda_grid") ? parse_grid(file["log_lambda_grid"]) : default_sweep_grid();
    if (file.contains("methods")) {
      if (!file["methods"].is_array() || file["methods"].empty()) bad("'methods' must be a nonempty array");
      s.methods.clear();
      for (const auto& m : file["methods"]) s.methods.push_back(sweep_method_from_string(get_string(m, "methods")));
    }
    if (file.contains("reps")) s.reps = get_positive_int(file["reps"], "reps");
    if (file.contains("eval_n")) s.eval_n = static_cast<std::size_t>(get_positive_int(file["eval_n"], "eval_n"));
    if (file.contains("regret_restarts")) s.regret_restarts = get_positive_int(file["regret_restarts"], "regret_restarts");
    if (file.contains("regret_max_iter")) s.regret_max_iter = get_positive_int(file["regret_max_iter"], "regret_max_iter");
    if (rc.smoke) {
      s.reps = 20;
      s.eval_n = 10000;
    }
    s.n = rc.n;
    s.seed = rc.seed;
    s.nuisance = rc.nuisance;
    s.policy = rc.policy;
    s.threads = rc.threads;
  }
  return rc;
}

}  // namespace msmpolicy::cli
