#pragma once

#include "stackrl/config.hpp"

namespace stackrl::cli {

struct TrainOptions {
  std::string config_path;  // one of config_path / preset
  std::string preset;
  nlohmann::json overrides;  // merged on top of the file or preset
};
int cmd_train(const TrainOptions& opts);

struct EvalOptions {
  std::string checkpoint;
  std::string config_path;  // defaults to the run's resolved_config.json
  int episodes = 0;
  int stage = 0;  // 0 keeps the configured stage
  uint64_t seed = 1;
  std::string json_out;  // optional file for the summary
};
int cmd_eval(const EvalOptions& opts);

struct ReplayEpisodeOptions {
  std::string checkpoint;
  std::string config_path;
  uint64_t seed = 1;
  std::string out_path;  // empty prints to stdout
};
int cmd_replay_episode(const ReplayEpisodeOptions& opts);

struct PrintConfigOptions {
  std::string config_path;
  std::string preset;
  bool list_presets = false;
};
int cmd_print_config(const PrintConfigOptions& opts);

}  // namespace stackrl::cli
