#include "stackrl/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace stackrl::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using config::ConfigError;
using config::RunConfig;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ConfigError("config", "cannot open file: " + path);
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

json merge_overrides(json base, const json& overrides) {
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      base[it.key()] = merge_overrides(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
  return base;
}

RunConfig resolve_run_config(const std::string& config_path, const std::string& preset,
                             const json& overrides) {
  if (config_path.empty() && preset.empty())
    throw ConfigError("config", "either a config file or a preset is required");
  if (!config_path.empty() && !preset.empty())
    throw ConfigError("config", "pass a config file or a preset, not both");
  json base = preset.empty() ? load_json_file(config_path) : config::preset_json(preset);
  if (!overrides.empty()) base = merge_overrides(base, overrides);
  return config::parse_config(base);
}

RunConfig config_for_checkpoint(const std::string& checkpoint,
                                const std::string& explicit_config) {
  if (!explicit_config.empty()) return config::load_config_file(explicit_config);
  const fs::path dir = fs::path(checkpoint).parent_path();
  for (const fs::path& candidate :
       {dir / "resolved_config.json", dir.parent_path() / "resolved_config.json"}) {
    if (fs::exists(candidate)) return config::load_config_file(candidate.string());
  }
  throw ConfigError("config",
                    "no resolved_config.json found next to the checkpoint; pass --config");
}

agent::Learner load_learner(const RunConfig& cfg, const std::string& checkpoint) {
  agent::Learner learner(cfg.learner, 0);
  learner.load_checkpoint(checkpoint);
  return learner;
}

}  // namespace

int cmd_train(const TrainOptions& opts) {
  RunConfig cfg = resolve_run_config(opts.config_path, opts.preset, opts.overrides);
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    std::ofstream snapshot(cfg.out_dir + "/resolved_config.json");
    snapshot << cfg.resolved.dump(2) << "\n";
  }
  trainer::Trainer tr = config::make_trainer(cfg);
  std::vector<trainer::EpochStats> history = tr.run();
  if (!history.empty()) {
    const trainer::EpochStats& last = history.back();
    std::cout << "final: epoch=" << last.epoch << " env_steps=" << last.env_steps
              << " stage=" << last.stage << " success_rate=" << last.success_rate
              << " mean_episode_reward=" << last.mean_episode_reward << "\n";
  }
  return 0;
}

int cmd_eval(const EvalOptions& opts) {
  if (opts.episodes <= 0) throw ConfigError("episodes", "must be positive");
  RunConfig cfg = config_for_checkpoint(opts.checkpoint, opts.config_path);
  if (opts.stage != 0) {
    if (opts.stage < 1 || opts.stage > 3) throw ConfigError("stage", "must be 1..3");
    cfg.env.stage = opts.stage;
  }
  agent::Learner learner = load_learner(cfg, opts.checkpoint);
  Rng rng(Rng(cfg.seed ^ opts.seed).fork(42).raw());
  trainer::TestSummary summary =
      trainer::run_test_episodes(learner, cfg.env, opts.episodes, rng);

  json out{{"version", 1},
           {"checkpoint", opts.checkpoint},
           {"episodes", opts.episodes},
           {"stage", cfg.env.stage},
           {"success_rate", summary.success_rate},
           {"mean_episode_reward", summary.mean_episode_reward}};
  std::cout << out.dump(2) << "\n";
  if (!opts.json_out.empty()) {
    std::ofstream f(opts.json_out);
    f << out.dump(2) << "\n";
  }
  return 0;
}

int cmd_replay_episode(const ReplayEpisodeOptions& opts) {
  RunConfig cfg = config_for_checkpoint(opts.checkpoint, opts.config_path);
  agent::Learner learner = load_learner(cfg, opts.checkpoint);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opts.out_path.empty()) {
    file.open(opts.out_path);
    SRL_CHECK(file.good(), "cannot open for writing: " + opts.out_path);
    out = &file;
  }

  Rng rng(opts.seed);
  blockworld::ResetResult r = blockworld::reset(cfg.env, rng);
  blockworld::EnvState state = r.state;
  const int horizon = cfg.env.horizon_or_default();
  for (int t = 0; t < horizon; ++t) {
    const Vec obs = blockworld::observe(state);
    const Vec a = learner.policy_action(agent::PolicyId::Exploit, obs, r.goal.flat,
                                        nullptr, false, nullptr);
    blockworld::StepResult sr =
        blockworld::step(state, blockworld::Action::from_vec(a), r.goal, cfg.env);
    json row{{"t", t},
             {"obs", obs},
             {"action", a},
             {"reward", sr.reward},
             {"criteria_satisfied", sr.info.criteria_satisfied},
             {"is_success", sr.info.is_success},
             {"goal", r.goal.flat}};
    (*out) << row.dump() << "\n";
    state = sr.state;
  }
  return 0;
}

int cmd_print_config(const PrintConfigOptions& opts) {
  if (opts.list_presets) {
    for (const std::string& name : config::preset_names()) std::cout << name << "\n";
    return 0;
  }
  if (opts.config_path.empty() && opts.preset.empty()) {
    std::cout << config::default_config_json().dump(2) << "\n";
    return 0;
  }
  RunConfig cfg = resolve_run_config(opts.config_path, opts.preset, json::object());
  std::cout << cfg.resolved.dump(2) << "\n";
  return 0;
}

}  // namespace stackrl::cli
