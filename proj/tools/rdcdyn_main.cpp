// rdcdyn: simulate, profile, solve and sweep discrete-state dynamics from
// residual dipolar couplings.
#include "rdcdyn/commands.hpp"
#include "rdcdyn/log.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace rdcdyn;

int main(int argc, char** argv) {
  CLI::App app{"Discrete-state protein dynamics from RDC data"};
  app.require_subcommand(1);
  app.fallthrough();  // allow global options after the subcommand

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> max_states;
  bool no_network = false;
  bool parsimonious = false;
  bool quiet = false;

  app.add_option("--config", config_path, "run configuration file")
      ->required();
  app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_option("--max-states", max_states,
                 "override the parsimonious state-count limit");
  app.add_flag("--no-network", no_network,
               "serve structures from the cache only");
  app.add_flag("--parsimonious", parsimonious,
               "escalate the state count until the fit reaches the noise");
  app.add_flag("--quiet", quiet, "suppress info/warning logging");

  auto* cmd_simulate =
      app.add_subcommand("simulate", "generate averaged RDC data plus truth");
  auto* cmd_profile =
      app.add_subcommand("profile", "forward/backward dynamic profiles");
  auto* cmd_solve =
      app.add_subcommand("solve", "recover states and occupancies");
  auto* cmd_sweep =
      app.add_subcommand("sweep", "batch simulate+solve over a matrix");

  CLI11_PARSE(app, argc, argv);
  set_log_quiet(quiet);

  try {
    RunConfig config = RunConfig::load_file(config_path);
    if (seed) config.seed = *seed;
    if (out_dir) config.out_dir = *out_dir;
    if (max_states) config.max_states = *max_states;
    if (no_network) config.no_network = true;
    if (parsimonious) config.parsimonious = true;

    if (cmd_simulate->parsed()) run_simulate(config);
    if (cmd_profile->parsed()) run_profile(config);
    if (cmd_solve->parsed()) run_solve(config);
    if (cmd_sweep->parsed()) run_sweep(config);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for_current_exception();
  }
}
