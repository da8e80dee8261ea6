#pragma once

#include <json.hpp>

#include "stackrl/trainer.hpp"

namespace stackrl::config {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Fully resolved run configuration. Unknown keys and missing required
/// fields are rejected at parse time; the resolved JSON snapshot is enough
/// to reproduce a single-worker run exactly.
struct RunConfig {
  uint64_t seed = 1;
  std::string out_dir;
  blockworld::EnvConfig env;
  agent::LearnerConfig learner;
  trainer::TrainConfig train;
  trainer::CurriculumSchedule curriculum;
  bool use_curiosity = true;
  bool use_multi_criteria = true;
  bool use_curriculum = true;
  bool her_enabled = true;
  double her_z = 0.8;

  nlohmann::json resolved;  // snapshot of the effective configuration
};

nlohmann::json default_config_json();
RunConfig parse_config(const nlohmann::json& input);
RunConfig load_config_file(const std::string& path);

std::vector<std::string> preset_names();
bool has_preset(const std::string& name);
nlohmann::json preset_json(const std::string& name);

trainer::Trainer make_trainer(const RunConfig& cfg);

}  // namespace stackrl::config
