#include <iostream>

#include <CLI11.hpp>

#include "stackrl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Goal-conditioned block stacking RL engine"};
  app.require_subcommand(1);

  stackrl::cli::TrainOptions train_opts;
  uint64_t train_seed = 0;
  std::string train_out;
  uint64_t train_max_steps = 0;
  int train_epochs = 0;
  auto* train = app.add_subcommand("train", "Train from a config file or preset");
  train->add_option("--config", train_opts.config_path, "JSON config file");
  train->add_option("--preset", train_opts.preset, "named preset");
  train->add_option("--seed", train_seed, "override the config seed");
  train->add_option("--out", train_out, "override the output directory");
  train->add_option("--max-env-steps", train_max_steps, "override the env step budget");
  train->add_option("--epochs", train_epochs, "override the epoch count");

  stackrl::cli::EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint with the exploit policy");
  eval->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint file")->required();
  eval->add_option("--config", eval_opts.config_path, "config (defaults to the run's)");
  eval->add_option("--episodes", eval_opts.episodes, "number of test episodes")->required();
  eval->add_option("--stage", eval_opts.stage, "curriculum stage to test on");
  eval->add_option("--seed", eval_opts.seed, "evaluation seed");
  eval->add_option("--json", eval_opts.json_out, "also write the summary to this file");

  stackrl::cli::ReplayEpisodeOptions replay_opts;
  auto* replay = app.add_subcommand("replay-episode",
                                    "Trace one deterministic episode as JSON lines");
  replay->add_option("--checkpoint", replay_opts.checkpoint, "checkpoint file")->required();
  replay->add_option("--config", replay_opts.config_path, "config (defaults to the run's)");
  replay->add_option("--seed", replay_opts.seed, "episode seed");
  replay->add_option("--out", replay_opts.out_path, "output file (default stdout)");

  stackrl::cli::PrintConfigOptions print_opts;
  auto* print = app.add_subcommand("print-config", "Print a resolved configuration");
  print->add_option("--config", print_opts.config_path, "JSON config file");
  print->add_option("--preset", print_opts.preset, "named preset");
  print->add_flag("--list", print_opts.list_presets, "list available presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(train)) {
      if (train->count("--seed")) train_opts.overrides["seed"] = train_seed;
      if (train->count("--out")) train_opts.overrides["out_dir"] = train_out;
      if (train->count("--max-env-steps"))
        train_opts.overrides["train"]["max_env_steps"] = train_max_steps;
      if (train->count("--epochs")) train_opts.overrides["train"]["epochs"] = train_epochs;
      return stackrl::cli::cmd_train(train_opts);
    }
    if (app.got_subcommand(eval)) return stackrl::cli::cmd_eval(eval_opts);
    if (app.got_subcommand(replay)) return stackrl::cli::cmd_replay_episode(replay_opts);
    if (app.got_subcommand(print)) return stackrl::cli::cmd_print_config(print_opts);
  } catch (const stackrl::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
