#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msmpolicy/learn.hpp"
#include "msmpolicy/nuisance.hpp"
#include "msmpolicy/simlab.hpp"

namespace msmpolicy::cli {

/// Values given on the command line. Unset fields fall back to the config
/// file, then to defaults.
struct Flags {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::filesystem::path> out_dir;
  bool smoke = false;
  bool with_truth = false;
  bool flip_sign = false;  // selfcheck test hook
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path out_dir = ".";
  bool smoke = false;
  bool with_truth = false;
  bool flip_sign = false;

  // Observational data (fit, evaluate, bounds).
  std::filesystem::path data;
  int m = 2;
  std::vector<double> treated_cost;  // per arm, subtracted from y; empty for none

  Method method = Method::kMmw;
  double log_lambda = 0.0;
  std::vector<double> log_lambda_grid;
  NuisanceSpec nuisance;
  PolicyClassSpec policy;
  DgpConfig dgp;

  // simulate: sample size. sweep: training size per repetition.
  std::size_t n = 1000;

  // evaluate
  std::filesystem::path policy_file;
  std::optional<std::filesystem::path> baseline_file;

  // sweep
  SweepConfig sweep;
};

const std::vector<std::string>& commands();

/// Builds the run configuration for `command` from the parsed config file
/// (an empty object when no file was given) and the flags. Relative paths in
/// the file resolve against `base_dir`. Throws BadConfig on unknown or
/// ill-typed keys and on out-of-range values.
RunConfig make_run_config(const std::string& command, const nlohmann::json& file, const std::filesystem::path& base_dir,
                          const Flags& flags);

/// Reads and parses a JSON config file. BadConfig when unreadable or
/// malformed.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// Thread count from MSMPOLICY_THREADS, if set to a positive integer.
std::optional<int> threads_from_env();

}  // namespace msmpolicy::cli
