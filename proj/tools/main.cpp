#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "c3bf/commands.hpp"

// Command-line front end: `c3bf run|verify|sweep`. All command logic lives in
// the library; this file only parses arguments.

int main(int argc, char** argv) {
  CLI::App app{"collision-cone safety filter: scenario runs, parameter sweeps and "
               "randomized self-checks"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir;
  c3bf::RunFlags flags;
  std::uint64_t seed_arg = 0;
  bool seed_given = false;
  double dt_arg = 0;
  bool dt_given = false;
  double duration_arg = 0;
  bool duration_given = false;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "scenario config (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->add_option("--seed", seed_arg, "override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--dt", dt_arg, "override the config time step [s]")
        ->each([&](const std::string&) { dt_given = true; });
    cmd->add_option("--duration", duration_arg, "override the config duration [s]")
        ->each([&](const std::string&) { duration_given = true; });
    cmd->add_flag("--plots", flags.plots, "write plots/*.svg");
    cmd->add_option("--format", flags.format, "trajectory export format")
        ->check(CLI::IsMember({"csv", "jsonl"}));
  };

  CLI::App* run_cmd = app.add_subcommand("run", "simulate one scenario");
  add_run_flags(run_cmd);

  long long samples = 10000;
  std::uint64_t verify_seed = 1;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the randomized property suites");
  verify_cmd->add_option("--samples", samples,
                         "base sample count (input-row suites use 10x this)");
  verify_cmd->add_option("--seed", verify_seed, "sample seed");

  c3bf::SweepRanges ranges;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid");
  add_run_flags(sweep_cmd);
  sweep_cmd->add_option("--gamma", ranges.gamma, "class-K gains, comma separated")
      ->delimiter(',');
  sweep_cmd
      ->add_option("--obstacle-speed", ranges.obstacle_speed,
                   "obstacle speed magnitudes, comma separated (rescales nonzero "
                   "obstacle velocities)")
      ->delimiter(',');
  sweep_cmd
      ->add_option("--target-speed", ranges.target_speed,
                   "target forward speeds, comma separated")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : c3bf::kExitConfig;
  }

  if (seed_given) flags.seed = seed_arg;
  if (dt_given) flags.dt = dt_arg;
  if (duration_given) flags.duration = duration_arg;

  if (run_cmd->parsed())
    return c3bf::cmd_run(config_file, out_dir, flags, std::cout, std::cerr);
  if (verify_cmd->parsed())
    return c3bf::cmd_verify(samples, verify_seed, std::cout, std::cerr);
  return c3bf::cmd_sweep(config_file, ranges, out_dir, flags, std::cout, std::cerr);
}
