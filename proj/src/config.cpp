#include "stackrl/config.hpp"

#include <fstream>

namespace stackrl::config {

using nlohmann::json;

json default_config_json() {
  return json{
      {"seed", 1},
      {"out_dir", ""},
      {"env",
       {{"n_blocks", nullptr},     // required
        {"reward_mode", nullptr},  // required: "binary" or "incremental"
        {"tolerance", 0.05},
        {"horizon", 0},  // 0 selects 50 * n_blocks
        {"stage", 0},    // 0 selects the curriculum start (1) or 3 without one
        {"block_size", 0.05},
        {"max_gripper_speed", 0.05},
        {"table_min", {0.10, 0.10}},
        {"table_max", {0.40, 0.40}},
        {"workspace_height", 0.30},
        {"gripper_start_z", {0.10, 0.20}},
        {"gripper_spawn_near_block_prob", 0.0},
        {"gripper_spawn_radius", 0.08},
        {"start_holding_prob", 0.0},
        {"stage1_air_target_prob", 0.5},
        {"stage2_table_target_prob", 0.25},
        {"air_z_range", {0.10, 0.25}}}},
      {"net",
       {{"hidden_sizes", {256, 256, 256}},
        {"exploit_critic_lr", 0.001},
        {"exploit_critic_l2", 0.0},
        {"exploit_actor_lr", 0.001},
        {"exploit_polyak", 0.001},
        {"explore_critic_lr", 0.001},
        {"explore_critic_l2", 0.01},
        {"explore_actor_lr", 0.001},
        {"explore_polyak", 0.05},
        {"combined_actor_lr", 0.001},
        {"combine_weight_explore", 0.5},
        {"combine_weight_exploit", 0.5},
        {"dynamics_lr", 0.007},
        {"preactivation_penalty", 0.001},
        {"popart_step_size", 0.001},
        {"target_clip", 0.0},
        {"input_clip", 5.0}}},
      {"train",
       {{"n_workers", 8},
        {"epochs", 50},
        {"cycles_per_epoch", 50},
        {"episodes_per_cycle", 8},
        {"batches_per_cycle", 8},
        {"batch_size", 1024},
        {"gamma", nullptr},  // null selects 1 - 1/horizon
        {"test_episodes_per_epoch", 50},
        {"buffer_capacity", 1000000},
        {"policy_assignment", nullptr},  // null selects half combined, half exploit
        {"max_env_steps", 0},
        {"stop_success_threshold", 0.0},
        {"parallel_workers", true},
        {"window", 100}}},
      {"her", {{"enabled", true}, {"z", 0.8}}},
      {"noise",
       {{"param_noise_enabled", true},
        {"param_noise_sigma_target", 0.1},
        {"gaussian_action_sigma", 0.04}}},
      {"ablations",
       {{"use_curiosity", true}, {"use_multi_criteria", true}, {"use_curriculum", true}}},
      {"curriculum",
       {{"success_threshold_stage1", 0.9}, {"success_threshold_stage2", 0.9}}}};
}

namespace {

void check_unknown_keys(const json& input, const json& schema, const std::string& prefix) {
  if (!input.is_object()) return;
  for (auto it = input.begin(); it != input.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.is_object() || !schema.contains(it.key()))
      throw ConfigError(path, "unknown key");
    if (it.value().is_object()) check_unknown_keys(it.value(), schema.at(it.key()), path);
  }
}

json merge(const json& defaults, const json& input) {
  json out = defaults;
  for (auto it = input.begin(); it != input.end(); ++it) {
    if (it.value().is_object() && out.contains(it.key()) && out.at(it.key()).is_object())
      out[it.key()] = merge(out.at(it.key()), it.value());
    else
      out[it.key()] = it.value();
  }
  return out;
}

template <typename T>
T read(const json& j, const std::string& path) {
  const json* node = &j;
  std::string rest = path;
  while (true) {
    const size_t dot = rest.find('.');
    const std::string key = rest.substr(0, dot);
    if (!node->contains(key)) throw ConfigError(path, "missing required field");
    node = &node->at(key);
    if (dot == std::string::npos) break;
    rest = rest.substr(dot + 1);
  }
  if (node->is_null()) throw ConfigError(path, "missing required field");
  try {
    return node->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, "has the wrong type");
  }
}

bool is_null(const json& j, const std::string& a, const std::string& b) {
  return !j.contains(a) || !j.at(a).contains(b) || j.at(a).at(b).is_null();
}

}  // namespace

RunConfig parse_config(const json& input) {
  const json defaults = default_config_json();
  check_unknown_keys(input, defaults, "");
  const json j = merge(defaults, input);

  RunConfig cfg;
  cfg.seed = read<uint64_t>(j, "seed");
  cfg.out_dir = read<std::string>(j, "out_dir");

  cfg.env.n_blocks = read<int>(j, "env.n_blocks");
  const std::string mode = read<std::string>(j, "env.reward_mode");
  if (mode == "binary")
    cfg.env.reward_mode = blockworld::RewardMode::Binary;
  else if (mode == "incremental")
    cfg.env.reward_mode = blockworld::RewardMode::Incremental;
  else
    throw ConfigError("env.reward_mode", "must be \"binary\" or \"incremental\"");
  cfg.env.tolerance = read<double>(j, "env.tolerance");
  cfg.env.horizon = read<int>(j, "env.horizon");
  cfg.env.block_size = read<double>(j, "env.block_size");
  cfg.env.max_gripper_speed = read<double>(j, "env.max_gripper_speed");
  const auto table_min = read<std::vector<double>>(j, "env.table_min");
  const auto table_max = read<std::vector<double>>(j, "env.table_max");
  if (table_min.size() != 2 || table_max.size() != 2)
    throw ConfigError("env.table_min", "table bounds need exactly 2 entries");
  cfg.env.table_min_x = table_min[0];
  cfg.env.table_min_y = table_min[1];
  cfg.env.table_max_x = table_max[0];
  cfg.env.table_max_y = table_max[1];
  cfg.env.workspace_height = read<double>(j, "env.workspace_height");
  const auto grip_z = read<std::vector<double>>(j, "env.gripper_start_z");
  if (grip_z.size() != 2) throw ConfigError("env.gripper_start_z", "needs exactly 2 entries");
  cfg.env.gripper_start_z_min = grip_z[0];
  cfg.env.gripper_start_z_max = grip_z[1];
  cfg.env.gripper_spawn_near_block_prob =
      read<double>(j, "env.gripper_spawn_near_block_prob");
  cfg.env.gripper_spawn_radius = read<double>(j, "env.gripper_spawn_radius");
  cfg.env.start_holding_prob = read<double>(j, "env.start_holding_prob");
  cfg.env.stage1_air_target_prob = read<double>(j, "env.stage1_air_target_prob");
  cfg.env.stage2_table_target_prob = read<double>(j, "env.stage2_table_target_prob");
  const auto air_z = read<std::vector<double>>(j, "env.air_z_range");
  if (air_z.size() != 2) throw ConfigError("env.air_z_range", "needs exactly 2 entries");
  cfg.env.air_z_min = air_z[0];
  cfg.env.air_z_max = air_z[1];

  cfg.use_curiosity = read<bool>(j, "ablations.use_curiosity");
  cfg.use_multi_criteria = read<bool>(j, "ablations.use_multi_criteria");
  cfg.use_curriculum = read<bool>(j, "ablations.use_curriculum");
  cfg.her_enabled = read<bool>(j, "her.enabled");
  cfg.her_z = read<double>(j, "her.z");

  const int stage = read<int>(j, "env.stage");
  cfg.env.stage = stage != 0 ? stage : (cfg.use_curriculum ? 1 : 3);

  agent::LearnerConfig& lc = cfg.learner;
  lc.obs_dim = cfg.env.obs_dim();
  lc.goal_dim = cfg.env.goal_dim();
  lc.action_dim = blockworld::Action::dim;
  lc.hidden = read<std::vector<int>>(j, "net.hidden_sizes");
  lc.exploit_critic_lr = read<double>(j, "net.exploit_critic_lr");
  lc.exploit_critic_l2 = read<double>(j, "net.exploit_critic_l2");
  lc.exploit_actor_lr = read<double>(j, "net.exploit_actor_lr");
  lc.polyak_exploit = read<double>(j, "net.exploit_polyak");
  lc.explore_critic_lr = read<double>(j, "net.explore_critic_lr");
  lc.explore_critic_l2 = read<double>(j, "net.explore_critic_l2");
  lc.explore_actor_lr = read<double>(j, "net.explore_actor_lr");
  lc.polyak_explore = read<double>(j, "net.explore_polyak");
  lc.combined_actor_lr = read<double>(j, "net.combined_actor_lr");
  lc.w_explore = read<double>(j, "net.combine_weight_explore");
  lc.w_exploit = read<double>(j, "net.combine_weight_exploit");
  lc.dynamics_lr = read<double>(j, "net.dynamics_lr");
  lc.preactivation_penalty = read<double>(j, "net.preactivation_penalty");
  lc.popart_step = read<double>(j, "net.popart_step_size");
  lc.target_clip = read<double>(j, "net.target_clip");
  lc.input_clip = read<double>(j, "net.input_clip");
  lc.use_curiosity = cfg.use_curiosity;
  lc.noise.param_noise_enabled = read<bool>(j, "noise.param_noise_enabled");
  lc.noise.param_noise_sigma_target = read<double>(j, "noise.param_noise_sigma_target");
  lc.noise.param_noise_sigma = lc.noise.param_noise_sigma_target;
  lc.noise.gaussian_action_sigma = read<double>(j, "noise.gaussian_action_sigma");
  if (is_null(j, "train", "gamma"))
    lc.gamma = 1.0 - 1.0 / cfg.env.horizon_or_default();
  else
    lc.gamma = read<double>(j, "train.gamma");

  trainer::TrainConfig& tc = cfg.train;
  tc.n_workers = read<int>(j, "train.n_workers");
  tc.epochs = read<int>(j, "train.epochs");
  tc.cycles_per_epoch = read<int>(j, "train.cycles_per_epoch");
  tc.episodes_per_cycle = read<int>(j, "train.episodes_per_cycle");
  tc.batches_per_cycle = read<int>(j, "train.batches_per_cycle");
  tc.batch_size = read<int>(j, "train.batch_size");
  tc.test_episodes_per_epoch = read<int>(j, "train.test_episodes_per_epoch");
  tc.buffer_capacity = read<size_t>(j, "train.buffer_capacity");
  tc.max_env_steps = read<uint64_t>(j, "train.max_env_steps");
  tc.stop_success_threshold = read<double>(j, "train.stop_success_threshold");
  tc.parallel_workers = read<bool>(j, "train.parallel_workers");
  tc.window = read<int>(j, "train.window");
  if (!is_null(j, "train", "policy_assignment")) {
    const auto names = read<std::vector<std::string>>(j, "train.policy_assignment");
    for (const std::string& n : names) {
      try {
        tc.policy_assignment.push_back(agent::policy_from_name(n));
      } catch (const std::exception&) {
        throw ConfigError("train.policy_assignment", "unknown policy \"" + n + "\"");
      }
    }
  }
  if (!cfg.her_enabled)
    tc.her_mode = replay::HerMode::None;
  else
    tc.her_mode = cfg.use_multi_criteria ? replay::HerMode::MultiCriteria
                                         : replay::HerMode::Standard;
  tc.her_z = cfg.her_z;

  cfg.curriculum.enabled = cfg.use_curriculum;
  cfg.curriculum.start_stage = cfg.env.stage;
  cfg.curriculum.threshold_stage1 = read<double>(j, "curriculum.success_threshold_stage1");
  cfg.curriculum.threshold_stage2 = read<double>(j, "curriculum.success_threshold_stage2");

  try {
    cfg.env.validate();
  } catch (const std::exception& e) {
    throw ConfigError("env", e.what());
  }

  cfg.resolved = j;
  cfg.resolved["env"]["horizon"] = cfg.env.horizon_or_default();
  cfg.resolved["env"]["stage"] = cfg.env.stage;
  cfg.resolved["train"]["gamma"] = lc.gamma;
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ConfigError("config", "cannot open file: " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

namespace {

struct PresetSpec {
  std::string ablation;
  int n_blocks;
  std::string reward_mode;
};

const std::vector<std::string> kAblations = {"all3", "no_curiosity", "no_multicriteria",
                                             "no_curriculum", "vanilla"};

int paper_worker_count(int n_blocks, const std::string& reward_mode) {
  if (n_blocks <= 1) return 2;
  if (reward_mode == "binary") return n_blocks == 2 ? 8 : 32;
  return n_blocks == 4 ? 32 : 8;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const std::string& ab : kAblations)
    for (int n = 1; n <= 4; ++n)
      for (const char* mode : {"binary", "incremental"})
        names.push_back(ab + "-stack" + std::to_string(n) + "-" + mode);
  return names;
}

bool has_preset(const std::string& name) {
  for (const std::string& n : preset_names())
    if (n == name) return true;
  return false;
}

nlohmann::json preset_json(const std::string& name) {
  if (!has_preset(name)) throw ConfigError("preset", "unknown preset \"" + name + "\"");
  std::string rest = name;
  const size_t first = rest.find("-stack");
  const std::string ablation = rest.substr(0, first);
  rest = rest.substr(first + 6);
  const int n_blocks = std::stoi(rest.substr(0, 1));
  const std::string mode = rest.substr(2);

  json j{{"env", {{"n_blocks", n_blocks}, {"reward_mode", mode}}},
         {"train", {{"n_workers", paper_worker_count(n_blocks, mode)}}},
         {"out_dir", "runs/" + name}};
  json ab{{"use_curiosity", true}, {"use_multi_criteria", true}, {"use_curriculum", true}};
  if (ablation == "no_curiosity") ab["use_curiosity"] = false;
  if (ablation == "no_multicriteria") ab["use_multi_criteria"] = false;
  if (ablation == "no_curriculum") ab["use_curriculum"] = false;
  if (ablation == "vanilla")
    ab = {{"use_curiosity", false}, {"use_multi_criteria", false}, {"use_curriculum", false}};
  j["ablations"] = ab;
  return j;
}

trainer::Trainer make_trainer(const RunConfig& cfg) {
  return trainer::Trainer(cfg.env, cfg.train, cfg.curriculum, cfg.learner, cfg.seed,
                          cfg.out_dir);
}

}  // namespace stackrl::config
