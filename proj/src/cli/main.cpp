#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "msmpolicy/error.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code(msmpolicy::ErrorCategory c) {
  switch (c) {
    case msmpolicy::ErrorCategory::kConfig: return kExitConfig;
    case msmpolicy::ErrorCategory::kData: return kExitData;
    case msmpolicy::ErrorCategory::kNumeric: return kExitNumeric;
  }
  return kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = msmpolicy::cli;
  CLI::App app{"Policy learning under the marginal sensitivity model"};
  app.require_subcommand(1);
  app.fallthrough();

  cli::Flags flags;
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: config, then MSMPOLICY_THREADS)")
                          ->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_flag("--smoke", flags.smoke, "sweep: 20 repetitions, 10000 evaluation units");
  app.add_flag("--with-truth", flags.with_truth, "simulate: also write potential outcomes and U");
  app.add_flag("--flip-sign", flags.flip_sign)->group("");

  const std::vector<std::pair<std::string, std::string>> subcommands{
      {"simulate", "Draw a sample from the simulation design"},
      {"fit", "Learn a policy (MMW or MMI) from a dataset"},
      {"evaluate", "Estimate W and Delta of a saved policy"},
      {"bounds", "Export per-unit bounds on mu and tau over a lambda grid"},
      {"sweep", "Sensitivity sweep on the simulation design with charts"},
      {"selfcheck", "Check closed forms against independent oracles"},
  };
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();
  if (*config_opt) flags.config = config_path;
  if (*seed_opt) flags.seed = seed;
  if (*threads_opt) flags.threads = threads;
  if (*out_opt) flags.out_dir = out_dir;

  try {
    nlohmann::json file = nlohmann::json::object();
    std::filesystem::path base_dir;
    if (flags.config) {
      file = cli::read_config_file(*flags.config);
      base_dir = flags.config->parent_path();
    }
    const cli::RunConfig rc = cli::make_run_config(command, file, base_dir, flags);
    return cli::run_command(rc, std::cout, std::cerr);
  } catch (const msmpolicy::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
