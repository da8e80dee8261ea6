#include "stackrl/blockworld.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stackrl::blockworld {

namespace {

double dist3(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double dist_xy(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

double rest_z(const EnvConfig& cfg, int level) {
  return cfg.block_size / 2.0 + cfg.block_size * level;
}

Vec3 sample_table_point(const EnvConfig& cfg, Rng& rng) {
  return {rng.uniform(cfg.table_min_x, cfg.table_max_x),
          rng.uniform(cfg.table_min_y, cfg.table_max_y), rest_z(cfg, 0)};
}

// Table point at least `separation` (xy) away from every point in `avoid`
// and at least `target_clearance` (3d) away from `clear_of` when given.
Vec3 sample_clear_table_point(const EnvConfig& cfg, Rng& rng,
                              const std::vector<Vec3>& avoid, double separation,
                              const Vec3* clear_of = nullptr,
                              double target_clearance = 0.0) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vec3 p = sample_table_point(cfg, rng);
    bool ok = true;
    for (const Vec3& a : avoid)
      if (dist_xy(p, a) < separation) ok = false;
    if (clear_of && dist3(p, *clear_of) <= target_clearance) ok = false;
    if (ok) return p;
  }
  throw std::runtime_error("reset: table too crowded to place blocks");
}

// Drops every unheld block onto the column under its footprint, in ascending
// height order. Idempotent for already settled states.
void settle_blocks(EnvState& s, const EnvConfig& cfg) {
  std::vector<int> order(s.block_pos.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (s.block_pos[a][2] != s.block_pos[b][2]) return s.block_pos[a][2] < s.block_pos[b][2];
    return a < b;
  });
  std::vector<int> settled;
  for (int i : order) {
    if (i == s.held_block) continue;
    double top = 0.0;  // table surface
    for (int j : settled) {
      if (dist_xy(s.block_pos[i], s.block_pos[j]) <= cfg.block_size / 2.0)
        top = std::max(top, s.block_pos[j][2] + cfg.block_size / 2.0);
    }
    s.block_pos[i][2] = top + cfg.block_size / 2.0;
    settled.push_back(i);
  }
}

}  // namespace

void EnvConfig::validate() const {
  SRL_CHECK(n_blocks >= 1 && n_blocks <= 4, "n_blocks must be in 1..4");
  SRL_CHECK(tolerance > 0.0, "tolerance must be positive");
  SRL_CHECK(horizon >= 0, "horizon must be non-negative");
  SRL_CHECK(stage >= 1 && stage <= 3, "stage must be 1..3");
  SRL_CHECK(block_size > 0.0 && max_gripper_speed > 0.0, "sizes must be positive");
  SRL_CHECK(table_max_x > table_min_x && table_max_y > table_min_y, "bad table bounds");
  SRL_CHECK(workspace_height > block_size * n_blocks, "workspace too low for the stack");
}

Action Action::from_vec(const Vec& v) {
  SRL_CHECK(v.size() == 4, "action vector must have 4 components");
  auto clamp1 = [](double x) { return std::clamp(x, -1.0, 1.0); };
  return Action{clamp1(v[0]), clamp1(v[1]), clamp1(v[2]), clamp1(v[3])};
}

ResetResult reset(const EnvConfig& config, Rng& rng) {
  config.validate();
  const int n = config.n_blocks;
  ResetResult out;
  EnvState& s = out.state;
  s.block_pos.resize(n);
  s.block_vel.assign(n, Vec3{0, 0, 0});
  s.gripper_vel = {0, 0, 0};
  s.claw = 1.0;
  s.held_block = -1;
  s.t = 0;

  auto place_gripper = [&] {
    double gx = rng.uniform(config.table_min_x, config.table_max_x);
    double gy = rng.uniform(config.table_min_y, config.table_max_y);
    if (rng.uniform() < config.gripper_spawn_near_block_prob) {
      const Vec3& anchor = s.block_pos[rng.uniform_int(0, n - 1)];
      const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const double radius = rng.uniform(0.0, config.gripper_spawn_radius);
      gx = std::clamp(anchor[0] + radius * std::cos(angle), config.table_min_x,
                      config.table_max_x);
      gy = std::clamp(anchor[1] + radius * std::sin(angle), config.table_min_y,
                      config.table_max_y);
    }
    s.gripper_pos = {gx, gy, rng.uniform(config.gripper_start_z_min,
                                         config.gripper_start_z_max)};
  };

  // optional held start; the held block must stay clear of its own target
  auto maybe_start_holding = [&](const Goal& goal) {
    if (rng.uniform() >= config.start_holding_prob) return;
    const int held = static_cast<int>(rng.uniform_int(0, n - 1));
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vec3 carried = {s.gripper_pos[0], s.gripper_pos[1],
                            s.gripper_pos[2] - config.block_size / 2.0};
      const Vec3 target = goal.criterion(held);
      const double d = std::sqrt((carried[0] - target[0]) * (carried[0] - target[0]) +
                                 (carried[1] - target[1]) * (carried[1] - target[1]) +
                                 (carried[2] - target[2]) * (carried[2] - target[2]));
      if (config.stage == 1 || d > 2.0 * config.tolerance) {
        s.held_block = held;
        s.claw = 0.0;
        s.block_pos[held] = carried;
        return;
      }
      place_gripper();
    }
  };

  Goal& g = out.goal;
  g.flat.assign(3 * n, 0.0);
  auto set_target = [&](int i, const Vec3& p) {
    g.flat[3 * i] = p[0];
    g.flat[3 * i + 1] = p[1];
    g.flat[3 * i + 2] = p[2];
  };

  if (config.stage == 1) {
    // Random block and target placements on the table; with some probability
    // a single target is lifted into the air.
    std::vector<Vec3> placed;
    for (int i = 0; i < n; ++i) {
      s.block_pos[i] = sample_clear_table_point(config, rng, placed, config.block_size);
      placed.push_back(s.block_pos[i]);
    }
    std::vector<Vec3> targets;
    for (int i = 0; i < n; ++i) {
      Vec3 tgt = sample_clear_table_point(config, rng, targets, config.block_size);
      targets.push_back(tgt);
      set_target(i, tgt);
    }
    if (rng.uniform() < config.stage1_air_target_prob) {
      const int lifted = static_cast<int>(rng.uniform_int(0, n - 1));
      g.flat[3 * lifted + 2] = rng.uniform(config.air_z_min, config.air_z_max);
      out.info.air_target = true;
    }
    place_gripper();
    maybe_start_holding(g);
    out.info.initially_placed = criteria_satisfied_count(achieved_goal(s).flat, g, config);
    return out;
  }

  // Stages 2 and 3: targets form a stack at a random base, possibly with some
  // targets left on the table (stage 2 only).
  const Vec3 base = sample_table_point(config, rng);
  std::vector<int> stack_members;
  std::vector<int> table_members;
  if (config.stage == 2) {
    for (int i = 0; i < n; ++i) {
      if (i > 0 && rng.uniform() < config.stage2_table_target_prob)
        table_members.push_back(i);
      else
        stack_members.push_back(i);
    }
  } else {
    for (int i = 0; i < n; ++i) stack_members.push_back(i);
  }

  std::vector<Vec3> taken = {base};
  for (size_t level = 0; level < stack_members.size(); ++level) {
    Vec3 tgt = {base[0], base[1], rest_z(config, static_cast<int>(level))};
    set_target(stack_members[level], tgt);
  }
  for (int i : table_members) {
    Vec3 tgt = sample_clear_table_point(config, rng, taken, config.block_size);
    taken.push_back(tgt);
    set_target(i, tgt);
  }

  // Blocks: stage 2 initializes a random number of them already at their
  // targets (stack slots filled bottom-up); the rest start on the table away
  // from their own targets. Stage 3 starts everything on the table.
  int k = 0;
  if (config.stage == 2) k = static_cast<int>(rng.uniform_int(0, n - 1));
  std::vector<int> placement_order = stack_members;
  placement_order.insert(placement_order.end(), table_members.begin(), table_members.end());

  std::vector<Vec3> occupied = {base};
  std::vector<bool> in_place(n, false);
  for (int rank = 0; rank < k; ++rank) {
    const int i = placement_order[rank];
    s.block_pos[i] = out.goal.criterion(i);
    in_place[i] = true;
    occupied.push_back(s.block_pos[i]);
  }
  for (int i = 0; i < n; ++i) {
    if (in_place[i]) continue;
    const Vec3 own_target = out.goal.criterion(i);
    s.block_pos[i] = sample_clear_table_point(config, rng, occupied, config.block_size,
                                              &own_target, 2.0 * config.tolerance);
    occupied.push_back(s.block_pos[i]);
  }
  place_gripper();
  maybe_start_holding(out.goal);
  out.info.initially_placed =
      s.held_block >= 0
          ? criteria_satisfied_count(achieved_goal(s).flat, out.goal, config)
          : k;
  return out;
}

StepResult step(const EnvState& state, const Action& action, const Goal& goal,
                const EnvConfig& config) {
  SRL_CHECK(static_cast<int>(state.block_pos.size()) == config.n_blocks,
            "step: state does not match config");
  SRL_CHECK(goal.n_criteria() == config.n_blocks, "step: goal does not match config");

  StepResult out;
  EnvState& s = out.state;
  s = state;

  auto clamp1 = [](double x) { return std::clamp(x, -1.0, 1.0); };
  const Vec3 move = {clamp1(action.dx) * config.max_gripper_speed,
                     clamp1(action.dy) * config.max_gripper_speed,
                     clamp1(action.dz) * config.max_gripper_speed};
  Vec3 new_pos = {s.gripper_pos[0] + move[0], s.gripper_pos[1] + move[1],
                  s.gripper_pos[2] + move[2]};
  new_pos[0] = std::clamp(new_pos[0], config.table_min_x, config.table_max_x);
  new_pos[1] = std::clamp(new_pos[1], config.table_min_y, config.table_max_y);
  new_pos[2] = std::clamp(new_pos[2], config.block_size / 2.0, config.workspace_height);
  for (int d = 0; d < 3; ++d) s.gripper_vel[d] = new_pos[d] - s.gripper_pos[d];
  s.gripper_pos = new_pos;

  const double claw_cmd = clamp1(action.claw_cmd);
  s.claw = std::clamp(s.claw + claw_cmd, 0.0, 1.0);

  if (claw_cmd < 0.0 && s.held_block < 0) {
    // Grasp the nearest block within reach, ties to the lowest index.
    int best = -1;
    double best_dist = 0.0;
    for (int i = 0; i < config.n_blocks; ++i) {
      const double d = dist3(s.gripper_pos, s.block_pos[i]);
      if (d > config.block_size / 2.0) continue;
      if (best < 0 || d < best_dist) {
        best = i;
        best_dist = d;
      }
    }
    if (best >= 0) s.held_block = best;
  } else if (claw_cmd > 0.0 && s.held_block >= 0) {
    s.held_block = -1;  // release; the block settles below
  }

  if (s.held_block >= 0) {
    // Held block tracks the gripper, offset by half the claw depth.
    s.block_pos[s.held_block] = {s.gripper_pos[0], s.gripper_pos[1],
                                 s.gripper_pos[2] - config.block_size / 2.0};
  }
  settle_blocks(s, config);
  for (int i = 0; i < config.n_blocks; ++i)
    for (int d = 0; d < 3; ++d)
      s.block_vel[i][d] = s.block_pos[i][d] - state.block_pos[i][d];

  s.t = state.t + 1;
  out.reward = reward_fn(s, goal, config);
  out.info.criteria_satisfied = criteria_satisfied_count(achieved_goal(s).flat, goal, config);
  out.info.is_success = is_success(s, goal, config);
  return out;
}

Vec observe(const EnvState& state) {
  Vec obs;
  obs.reserve(7 + 6 * state.block_pos.size());
  for (double v : state.gripper_pos) obs.push_back(v);
  for (double v : state.gripper_vel) obs.push_back(v);
  obs.push_back(state.claw);
  for (size_t i = 0; i < state.block_pos.size(); ++i) {
    for (double v : state.block_pos[i]) obs.push_back(v);
    for (double v : state.block_vel[i]) obs.push_back(v);
  }
  return obs;
}

Goal achieved_goal(const EnvState& state) {
  Goal g;
  g.flat.reserve(3 * state.block_pos.size());
  for (const Vec3& p : state.block_pos)
    for (double v : p) g.flat.push_back(v);
  return g;
}

int criteria_satisfied_count(const Vec& achieved_flat, const Goal& goal,
                             const EnvConfig& config) {
  SRL_CHECK(achieved_flat.size() == goal.flat.size(), "criteria count mismatch");
  int satisfied = 0;
  for (int i = 0; i < goal.n_criteria(); ++i) {
    const double dx = achieved_flat[3 * i] - goal.flat[3 * i];
    const double dy = achieved_flat[3 * i + 1] - goal.flat[3 * i + 1];
    const double dz = achieved_flat[3 * i + 2] - goal.flat[3 * i + 2];
    if (std::sqrt(dx * dx + dy * dy + dz * dz) <= config.tolerance) ++satisfied;
  }
  return satisfied;
}

double reward_from_positions(const Vec3& gripper_pos, const Vec& achieved_flat,
                             const Goal& goal, const EnvConfig& config) {
  const int n = goal.n_criteria();
  const int satisfied = criteria_satisfied_count(achieved_flat, goal, config);
  double reward = config.reward_mode == RewardMode::Binary
                      ? (satisfied == n ? 0.0 : -1.0)
                      : static_cast<double>(satisfied - n);
  if (satisfied == n) {
    bool gripper_away = true;
    for (int i = 0; i < n; ++i) {
      const Vec3 block = {achieved_flat[3 * i], achieved_flat[3 * i + 1],
                          achieved_flat[3 * i + 2]};
      if (dist3(gripper_pos, block) <= 2.0 * config.tolerance) gripper_away = false;
    }
    if (gripper_away) reward += 1.0;
  }
  return reward;
}

double reward_fn(const EnvState& next_state, const Goal& goal, const EnvConfig& config) {
  return reward_from_positions(next_state.gripper_pos, achieved_goal(next_state).flat,
                               goal, config);
}

bool is_success(const EnvState& state, const Goal& goal, const EnvConfig& config) {
  return criteria_satisfied_count(achieved_goal(state).flat, goal, config) ==
         goal.n_criteria();
}

Vec3 gripper_pos_from_obs(const Vec& obs) {
  SRL_CHECK(obs.size() >= 3, "observation too short");
  return {obs[0], obs[1], obs[2]};
}

}  // namespace stackrl::blockworld
