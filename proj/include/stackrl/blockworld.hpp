#pragma once

#include <array>
#include <optional>

#include "stackrl/common.hpp"

namespace stackrl::blockworld {

using Vec3 = std::array<double, 3>;

enum class RewardMode { Binary, Incremental };

struct EnvConfig {
  int n_blocks = 1;
  RewardMode reward_mode = RewardMode::Binary;
  double tolerance = 0.05;  // goal satisfaction radius
  int horizon = 0;          // 0 selects the default of 50 * n_blocks
  int stage = 1;            // curriculum stage, 1..3
  double block_size = 0.05;
  double max_gripper_speed = 0.05;  // metres per step at |action| = 1
  double table_min_x = 0.10, table_max_x = 0.40;
  double table_min_y = 0.10, table_max_y = 0.40;
  double workspace_height = 0.30;
  double gripper_start_z_min = 0.10, gripper_start_z_max = 0.20;
  // With this probability the gripper spawns within gripper_spawn_radius
  // (xy) of a random block, mimicking the short reach of the arm it stands
  // in for. 0 keeps a uniform spawn over the table.
  double gripper_spawn_near_block_prob = 0.0;
  double gripper_spawn_radius = 0.08;
  // Probability that an episode starts with a random block already grasped.
  // Stands in for the incidental object contact a physical simulator would
  // provide; stages 2-3 keep the held block away from its target. When it
  // fires, ResetInfo.initially_placed reports the recounted value.
  double start_holding_prob = 0.0;
  double stage1_air_target_prob = 0.5;
  double stage2_table_target_prob = 0.25;
  double air_z_min = 0.10, air_z_max = 0.25;

  int horizon_or_default() const { return horizon > 0 ? horizon : 50 * n_blocks; }
  int obs_dim() const { return 7 + 6 * n_blocks; }
  int goal_dim() const { return 3 * n_blocks; }
  void validate() const;
};

/// Per-block target positions; criterion i is the 3-vector for block i.
struct Goal {
  Vec flat;  // 3 * n_blocks
  int n_criteria() const { return static_cast<int>(flat.size()) / 3; }
  Vec3 criterion(int i) const {
    return {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
  }
};

struct EnvState {
  Vec3 gripper_pos{};
  Vec3 gripper_vel{};
  double claw = 1.0;  // 0 closed .. 1 open
  std::vector<Vec3> block_pos;
  std::vector<Vec3> block_vel;
  int held_block = -1;  // -1 when nothing is held
  int t = 0;
};

struct Action {
  double dx = 0.0, dy = 0.0, dz = 0.0;
  double claw_cmd = 0.0;  // < 0 close/grasp, > 0 open/release
  static Action from_vec(const Vec& v);
  Vec to_vec() const { return {dx, dy, dz, claw_cmd}; }
  static constexpr int dim = 4;
};

struct StepInfo {
  int criteria_satisfied = 0;
  bool is_success = false;
};

struct ResetInfo {
  int initially_placed = 0;   // criteria satisfied at t = 0 by construction
  bool air_target = false;    // stage 1 only
};

struct ResetResult {
  EnvState state;
  Goal goal;
  ResetInfo info;
};

ResetResult reset(const EnvConfig& config, Rng& rng);

struct StepResult {
  EnvState state;
  double reward = 0.0;
  StepInfo info;
};

StepResult step(const EnvState& state, const Action& action, const Goal& goal,
                const EnvConfig& config);

/// Observation layout: gripper_pos(3), gripper_vel(3), claw(1), then per
/// block pos(3), vel(3).
Vec observe(const EnvState& state);
Goal achieved_goal(const EnvState& state);

int criteria_satisfied_count(const Vec& achieved_flat, const Goal& goal,
                             const EnvConfig& config);
/// Core reward given positions only; used both by step() and by hindsight
/// reward recomputation.
double reward_from_positions(const Vec3& gripper_pos, const Vec& achieved_flat,
                             const Goal& goal, const EnvConfig& config);
double reward_fn(const EnvState& next_state, const Goal& goal, const EnvConfig& config);
bool is_success(const EnvState& state, const Goal& goal, const EnvConfig& config);

Vec3 gripper_pos_from_obs(const Vec& obs);

}  // namespace stackrl::blockworld
