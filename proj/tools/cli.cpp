#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dps/cli.hpp"
#include "dps/errors.hpp"

namespace dps::cli {

int run_cli(int argc, char** argv) {
  CLI::App app{"Priority-pricing equilibria on discriminatory processor sharing queues"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<std::pair<Mode, CLI::App*>> commands;
  for (Mode mode : all_modes()) {
    auto* sub = app.add_subcommand(std::string(to_string(mode)));
    sub->add_option("--config", config_path, "scenario JSON file")->required();
    sub->add_option("--out", out_path, "CSV output path (default: stdout)");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    commands.emplace_back(mode, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Mode mode = Mode::Compare;
  RunOptions options;
  for (const auto& [m, sub] : commands) {
    if (!sub->parsed()) continue;
    mode = m;
    if (sub->count("--seed") > 0) options.seed = seed;
    if (sub->count("--threads") > 0) options.threads = threads;
  }

  std::string csv;
  try {
    const Scenario scenario = load_scenario(config_path, options);
    if (scenario.mode && *scenario.mode != mode)
      throw ConfigError("config declares mode '" + std::string(to_string(*scenario.mode)) +
                        "' but '" + std::string(to_string(mode)) + "' was requested");
    csv = render_csv(mode, scenario, run_mode(mode, scenario));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  }

  if (out_path.empty()) {
    std::cout << csv;
    std::cout.flush();
    return std::cout ? 0 : 3;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  out << csv;
  if (!out) {
    std::cerr << "cannot write '" << out_path << "'\n";
    return 2;
  }
  return 0;
}

}  // namespace dps::cli
