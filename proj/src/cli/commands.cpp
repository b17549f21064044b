#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "msmpolicy/bounds.hpp"
#include "msmpolicy/error.hpp"
#include "msmpolicy/random.hpp"
#include "msmpolicy/selfcheck.hpp"
#include "svg.hpp"

namespace msmpolicy::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<fs::path> OutputSet::commit() const {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  const std::string suffix = ".tmp" + std::to_string(::getpid());
  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [name, content] : files_) {
    const fs::path tmp = dir_ / (name + suffix);
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw Error(ErrorCode::kIoError, "cannot write '" + tmp.string() + "'");
    }
  }
  std::vector<fs::path> written;
  for (std::size_t k = 0; k < files_.size(); ++k) {
    const fs::path target = dir_ / files_[k].first;
    fs::rename(temps[k], target, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorCode::kIoError, "cannot rename into '" + target.string() + "': " + ec.message());
    }
    written.push_back(target);
  }
  return written;
}

Dataset load_dataset(const RunConfig& rc) {
  Dataset raw = read_dataset_csv(rc.data, rc.m);
  if (rc.treated_cost.empty()) return raw;
  std::vector<Observation> rows = raw.rows();
  for (auto& r : rows) r.y -= rc.treated_cost[static_cast<std::size_t>(r.a)];
  return validate_dataset(std::move(rows), rc.m, raw.column_names());
}

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string_view learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::kGbt: return "gbt";
    case LearnerKind::kKnn: return "knn";
    case LearnerKind::kOracle: return "oracle";
  }
  return "unknown";
}

std::vector<double> arm_shares(const Dataset& data, const Policy& policy) {
  std::vector<double> shares(static_cast<std::size_t>(policy.m()), 0.0);
  for (const auto& r : data.rows()) {
    const auto p = policy.assign_probabilities(r.x);
    for (std::size_t a = 0; a < p.size(); ++a) shares[a] += p[a];
  }
  for (auto& s : shares) s /= static_cast<double>(data.n());
  return shares;
}

json mean_se_json(const MeanSe& v) { return {{"estimate", v.mean}, {"se", v.se}}; }

json nuisance_json(const RunConfig& rc, const Dataset& data, std::size_t rearranged) {
  json j{{"learner", learner_name(rc.nuisance.learner)},
         {"folds", rc.nuisance.folds},
         {"clip_kappa", rc.nuisance.clip_kappa},
         {"arm_counts", data.arm_counts()},
         {"rearranged_units", rearranged}};
  if (rc.nuisance.learner == LearnerKind::kGbt) {
    j["gbt"] = {{"trees", rc.nuisance.gbt.trees},
                {"depth", rc.nuisance.gbt.depth},
                {"learning_rate", rc.nuisance.gbt.learning_rate},
                {"min_leaf", rc.nuisance.gbt.min_leaf}};
  }
  if (rc.nuisance.learner == LearnerKind::kKnn) j["knn_neighbors"] = rc.nuisance.knn_neighbors;
  return j;
}

json score_means(const ScoreTable& table) {
  json minus = json::array(), plus = json::array();
  for (int a = 0; a < table.m(); ++a) {
    double sm = 0.0, sp = 0.0;
    for (std::size_t i = 0; i < table.n(); ++i) {
      sm += table.phi_minus(i, a);
      if (table.has_plus()) sp += table.phi_plus(i, a);
    }
    minus.push_back(sm / static_cast<double>(table.n()));
    if (table.has_plus()) plus.push_back(sp / static_cast<double>(table.n()));
  }
  json j{{"phi_minus", minus}};
  if (table.has_plus()) j["phi_plus"] = plus;
  return j;
}

void check_oracle_shape(const RunConfig& rc, const Dataset& data) {
  if (rc.nuisance.learner == LearnerKind::kOracle && data.d() != 2) {
    throw Error(ErrorCode::kDimensionMismatch, "the oracle learner serves the two-covariate simulation design");
  }
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
  const auto samples = generate(rc.dgp, rc.n, rc.seed);
  OutputSet files(rc.out_dir);
  files.add("data.csv", dataset_to_csv(to_dataset(samples)));
  if (rc.with_truth) {
    std::string csv = "y,a,x1,x2,y0,y1,u\n";
    for (const auto& s : samples) {
      csv += format_double(s.y) + ',' + std::to_string(s.a) + ',' + format_double(s.x[0]) + ',' +
             format_double(s.x[1]) + ',' + format_double(s.y0) + ',' + format_double(s.y1) + ',' +
             std::to_string(s.u) + '\n';
    }
    files.add("truth.csv", std::move(csv));
  }
  for (const auto& p : files.commit()) out << p.string() << '\n';
  return 0;
}

int cmd_fit(const RunConfig& rc, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset data = load_dataset(rc);
  check_oracle_shape(rc, data);
  const auto lambda = SensitivityParam::from_log(rc.log_lambda);
  const bool need_plus = rc.method == Method::kMmi;
  if (need_plus && data.m() != 2) throw Error(ErrorCode::kNotBinary, "MMI needs exactly two arms");
  const FittedScores fitted = fit_scores(data, rc.nuisance, lambda, need_plus, rc.seed);
  const OptimizeResult opt = optimize_policy(fitted.table, rc.method, rc.policy, mix_seed(rc.seed, 1), rc.threads);
  const MeanSe value =
      rc.method == Method::kMmw ? estimate_W(fitted.table, opt.policy) : estimate_Delta(fitted.table, opt.policy);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto shares = arm_shares(data, opt.policy);
  json report{{"method", to_string(rc.method)},
              {"criterion", rc.method == Method::kMmw ? "W" : "Delta"},
              {"log_lambda", rc.log_lambda},
              {"lambda", lambda.value()},
              {"policy_class", to_string(rc.policy.cls)},
              {"n", data.n()},
              {"m", data.m()},
              {"value", mean_se_json(value)},
              {"arm_shares", shares},
              {"reduces_to_aw", lambda.is_unconfounded()},
              {"converged", opt.converged},
              {"seed", rc.seed},
              {"diagnostics", nuisance_json(rc, data, fitted.rearranged_units)},
              {"wall_time_seconds", seconds}};
  if (data.m() == 2) report["treated_fraction"] = shares[1];
  report["diagnostics"]["score_means"] = score_means(fitted.table);
  if (!rc.treated_cost.empty()) report["diagnostics"]["treated_cost"] = rc.treated_cost;

  OutputSet files(rc.out_dir);
  files.add("policy.json", dump(opt.policy.to_json()));
  files.add("fit_report.json", dump(report));
  files.add("scores.csv", score_table_to_csv(fitted.table));
  files.commit();
  out << to_string(rc.method) << " at log_lambda " << rc.log_lambda << ": " << report["criterion"].get<std::string>()
      << " = " << value.mean << " (se " << value.se << ")";
  if (data.m() == 2) out << ", treated fraction " << shares[1];
  out << '\n';
  return 0;
}

Policy read_policy(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read policy '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Policy::from_json(json::parse(buf.str()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, "policy '" + path.string() + "' is malformed: " + e.what());
  }
}

void check_policy_fits(const Policy& policy, const Dataset& data, const std::string& what) {
  if (policy.m() != data.m()) {
    throw Error(ErrorCode::kDimensionMismatch, what + " has " + std::to_string(policy.m()) + " arms, data has " +
                                                   std::to_string(data.m()));
  }
  if (policy.required_dimension() > data.d()) {
    throw Error(ErrorCode::kDimensionMismatch, what + " reads more covariates than the data has");
  }
}

int cmd_evaluate(const RunConfig& rc, std::ostream& out) {
  const Dataset data = load_dataset(rc);
  check_oracle_shape(rc, data);
  const Policy policy = read_policy(rc.policy_file);
  check_policy_fits(policy, data, "policy");
  std::optional<Policy> baseline;
  if (rc.baseline_file) {
    baseline = read_policy(*rc.baseline_file);
    check_policy_fits(*baseline, data, "baseline");
    if (data.m() != 2) throw Error(ErrorCode::kNotBinary, "baseline comparison needs exactly two arms");
  }
  const auto lambda = SensitivityParam::from_log(rc.log_lambda);
  const bool binary = data.m() == 2;
  const FittedScores fitted = fit_scores(data, rc.nuisance, lambda, binary, rc.seed);
  const auto shares = arm_shares(data, policy);
  json report{{"log_lambda", rc.log_lambda},
              {"lambda", lambda.value()},
              {"n", data.n()},
              {"m", data.m()},
              {"W", mean_se_json(estimate_W(fitted.table, policy))},
              {"arm_shares", shares},
              {"seed", rc.seed},
              {"diagnostics", nuisance_json(rc, data, fitted.rearranged_units)}};
  if (binary) {
    report["treated_fraction"] = shares[1];
    report["Delta"] = mean_se_json(estimate_Delta(fitted.table, policy));
  }
  if (baseline) report["Delta_vs_baseline"] = mean_se_json(estimate_Delta_vs_baseline(fitted.table, policy, *baseline));
  OutputSet files(rc.out_dir);
  files.add("evaluate_report.json", dump(report));
  files.commit();
  out << "W = " << report["W"]["estimate"].get<double>() << " (se " << report["W"]["se"].get<double>() << ")\n";
  return 0;
}

int cmd_bounds(const RunConfig& rc, std::ostream& out) {
  const Dataset data = load_dataset(rc);
  check_oracle_shape(rc, data);
  if (data.m() != 2) throw Error(ErrorCode::kNotBinary, "bounds export needs exactly two arms");
  NuisanceSpec spec = rc.nuisance;
  spec.fit_upper = true;
  const FoldAssignment folds = learning_folds(data.n(), spec.folds, rc.seed);
  const auto propensities = fit_crossfit_propensity(data, folds, spec);
  std::string csv = "log_lambda,unit,mu_lo_1,mu_hi_1,mu_lo_0,mu_hi_0,tau_lo,tau_hi\n";
  for (double log_lambda : rc.log_lambda_grid) {
    const auto lambda = SensitivityParam::from_log(log_lambda);
    spec.lambda = lambda;
    const NuisanceModel model = fit_crossfit(data, spec, folds, propensities);
    for (std::size_t i = 0; i < data.n(); ++i) {
      const auto v = model.predict_for_unit(i, data[i].x);
      double lo[2], hi[2];
      for (int a = 0; a < 2; ++a) {
        lo[a] = mu_bound_from_nuisance(v.e[a], v.rho_below_lower[a], v.rho_above_lower[a], lambda, BoundSide::kLower);
        hi[a] = mu_bound_from_nuisance(v.e[a], v.rho_below_upper[a], v.rho_above_upper[a], lambda, BoundSide::kUpper);
      }
      csv += format_double(log_lambda) + ',' + std::to_string(i) + ',' + format_double(lo[1]) + ',' +
             format_double(hi[1]) + ',' + format_double(lo[0]) + ',' + format_double(hi[0]) + ',' +
             format_double(lo[1] - hi[0]) + ',' + format_double(hi[1] - lo[0]) + '\n';
    }
  }
  OutputSet files(rc.out_dir);
  files.add("bounds.csv", std::move(csv));
  for (const auto& p : files.commit()) out << p.string() << '\n';
  return 0;
}

std::string summary_to_csv(const std::vector<SweepSummary>& summary) {
  std::string csv =
      "log_lambda,method,reps,treated_frac_mean,treated_frac_sd,exp_welfare_mean,exp_welfare_sd,"
      "worst_welfare_mean,worst_welfare_sd,worst_improvement_mean,worst_improvement_sd\n";
  for (const auto& s : summary) {
    csv += format_double(s.log_lambda) + ',' + std::string(to_string(s.method)) + ',' + std::to_string(s.reps) + ',' +
           format_double(s.mean.treated_fraction) + ',' + format_double(s.sd.treated_fraction) + ',' +
           format_double(s.mean.expected_welfare) + ',' + format_double(s.sd.expected_welfare) + ',' +
           format_double(s.mean.worst_welfare) + ',' + format_double(s.sd.worst_welfare) + ',' +
           format_double(s.mean.worst_improvement) + ',' + format_double(s.sd.worst_improvement) + '\n';
  }
  return csv;
}

std::string method_color(SweepMethod m) {
  switch (m) {
    case SweepMethod::kAw: return "#1f77b4";
    case SweepMethod::kMmw: return "#d62728";
    case SweepMethod::kMmi: return "#2ca02c";
  }
  return "black";
}

// Bands are mean +- 1.96 SD across repetitions.
std::string sweep_chart(const SweepConfig& config, const std::vector<SweepSummary>& summary, const std::string& title,
                        double EvalMetrics::*field) {
  std::vector<ChartSeries> series;
  for (SweepMethod m : config.methods) {
    ChartSeries s{std::string(to_string(m)), method_color(m), {}, {}, {}, {}};
    for (const auto& row : summary) {
      if (row.method != m) continue;
      const double mean = row.mean.*field;
      const double half = 1.96 * row.sd.*field;
      s.x.push_back(row.log_lambda);
      s.mean.push_back(mean);
      s.lower.push_back(mean - half);
      s.upper.push_back(mean + half);
    }
    series.push_back(std::move(s));
  }
  return line_chart_svg(title, "log Lambda", title, series);
}

int cmd_sweep(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const SweepConfig& config = rc.sweep;
  const auto start = std::chrono::steady_clock::now();
  const SweepResult result = run_sweep(config, [&](int done) {
    err << "repetition " << done << "/" << config.reps << " done\n";
    err.flush();
  });
  OutputSet files(rc.out_dir);
  files.add("sweep.csv", sweep_to_csv(result.rows));
  files.add("sweep_summary.csv", summary_to_csv(result.summary));
  files.add("treated_fraction.svg", sweep_chart(config, result.summary, "Treated fraction", &EvalMetrics::treated_fraction));
  files.add("expected_welfare.svg", sweep_chart(config, result.summary, "Expected welfare", &EvalMetrics::expected_welfare));
  files.add("worst_welfare.svg", sweep_chart(config, result.summary, "Worst-case welfare", &EvalMetrics::worst_welfare));
  files.add("worst_improvement.svg",
            sweep_chart(config, result.summary, "Worst-case improvement", &EvalMetrics::worst_improvement));
  files.commit();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << "sweep: " << config.reps << " repetitions x " << config.log_lambda_grid.size() << " grid points in "
      << seconds << " s\n";
  return 0;
}

int cmd_selfcheck(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  SelfCheckOptions options;
  if (rc.flip_sign) options.convention = SignConvention::kFlipped;
  const auto results = run_selfcheck(options);
  const std::string report = dump(selfcheck_to_json(results));
  OutputSet files(rc.out_dir);
  files.add("selfcheck.json", report);
  files.commit();
  out << report;
  if (all_passed(results)) return 0;
  for (const auto& r : results) {
    if (!r.passed) {
      err << "selfcheck failed: " << r.suite << "/" << r.name << " deviation " << r.deviation << " tolerance "
          << r.tolerance << '\n';
    }
  }
  return 3;
}

}  // namespace

int run_command(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.command == "simulate") return cmd_simulate(rc, out);
  if (rc.command == "fit") return cmd_fit(rc, out);
  if (rc.command == "evaluate") return cmd_evaluate(rc, out);
  if (rc.command == "bounds") return cmd_bounds(rc, out);
  if (rc.command == "sweep") return cmd_sweep(rc, out, err);
  if (rc.command == "selfcheck") return cmd_selfcheck(rc, out, err);
  throw Error(ErrorCode::kBadConfig, "unknown command '" + rc.command + "'");
}

}  // namespace msmpolicy::cli
