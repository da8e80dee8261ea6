#include <doctest.h>

#include <cmath>
#include <set>

#include "stackrl/blockworld.hpp"
#include "support/scripted_policy.hpp"

using namespace stackrl;
using namespace stackrl::blockworld;

namespace {

EnvConfig base_config(int n, RewardMode mode = RewardMode::Binary, int stage = 1) {
  EnvConfig cfg;
  cfg.n_blocks = n;
  cfg.reward_mode = mode;
  cfg.stage = stage;
  return cfg;
}

double dist3(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

// runs the scripted oracle for a full horizon, returns the trajectory rewards
struct OracleRun {
  EnvState final_state;
  Goal goal;
  std::vector<double> rewards;
  bool success = false;
};

OracleRun run_scripted(const EnvConfig& cfg, Rng& rng) {
  OracleRun run;
  ResetResult r = reset(cfg, rng);
  run.goal = r.goal;
  EnvState state = r.state;
  for (int t = 0; t < cfg.horizon_or_default(); ++t) {
    Vec a = testsupport::scripted_stacker_action(state, r.goal, cfg);
    StepResult sr = step(state, Action::from_vec(a), r.goal, cfg);
    run.rewards.push_back(sr.reward);
    state = sr.state;
    run.success = sr.info.is_success;
  }
  run.final_state = state;
  return run;
}

}  // namespace

TEST_CASE("zero action on a settled state changes only the clock") {
  EnvConfig cfg = base_config(2, RewardMode::Binary, 3);
  Rng rng(1);
  ResetResult r = reset(cfg, rng);
  // one settling step with no movement so velocities are zero
  StepResult s0 = step(r.state, Action{}, r.goal, cfg);
  StepResult s1 = step(s0.state, Action{}, r.goal, cfg);
  CHECK(s1.state.t == s0.state.t + 1);
  CHECK(s1.state.gripper_pos == s0.state.gripper_pos);
  CHECK(s1.state.claw == s0.state.claw);
  for (int i = 0; i < cfg.n_blocks; ++i) {
    CHECK(s1.state.block_pos[i] == s0.state.block_pos[i]);
    CHECK(s1.state.block_vel[i] == Vec3{0, 0, 0});
  }
}

TEST_CASE("grasped blocks track the gripper") {
  EnvConfig cfg = base_config(1);
  EnvState s;
  s.block_pos = {{0.25, 0.25, cfg.block_size / 2}};
  s.block_vel = {{0, 0, 0}};
  s.gripper_pos = {0.25, 0.25, cfg.block_size / 2};
  s.claw = 1.0;
  Goal g{Vec{0.3, 0.3, cfg.block_size / 2}};

  StepResult grasp = step(s, Action{0, 0, 0, -1}, g, cfg);
  CHECK(grasp.state.held_block == 0);

  StepResult lift = step(grasp.state, Action{0, 0, 1, 0}, g, cfg);
  CHECK(lift.state.block_pos[0][2] > grasp.state.block_pos[0][2]);
  CHECK(lift.state.block_pos[0][2] ==
        doctest::Approx(lift.state.gripper_pos[2] - cfg.block_size / 2));
}

TEST_CASE("released blocks settle onto the column under them") {
  EnvConfig cfg = base_config(2, RewardMode::Binary, 3);
  EnvState s;
  s.block_pos = {{0.2, 0.2, cfg.block_size / 2}, {0.2, 0.2, 0.2 - cfg.block_size / 2}};
  s.block_vel = {{0, 0, 0}, {0, 0, 0}};
  s.gripper_pos = {0.2, 0.2, 0.2};
  s.held_block = 1;
  s.claw = 0.0;
  Goal g{Vec{0.2, 0.2, 0.025, 0.2, 0.2, 0.075}};

  StepResult rel = step(s, Action{0, 0, 0, 1}, g, cfg);
  CHECK(rel.state.held_block == -1);
  CHECK(rel.state.block_pos[1][2] ==
        doctest::Approx(cfg.block_size / 2 + cfg.block_size));
  CHECK(rel.info.criteria_satisfied == 2);
}

TEST_CASE("scripted pick-and-place completes a single-block episode") {
  EnvConfig cfg = base_config(1, RewardMode::Binary, 3);
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    OracleRun run = run_scripted(cfg, rng);
    CHECK(run.success);
    // reward flips from -1 to >= 0 once the criterion holds
    CHECK(run.rewards.front() == -1.0);
    CHECK(run.rewards.back() >= 0.0);
    Goal achieved = achieved_goal(run.final_state);
    CHECK(dist3({achieved.flat[0], achieved.flat[1], achieved.flat[2]},
                run.goal.criterion(0)) <= cfg.tolerance);
  }
}

TEST_CASE("scripted stacking completes two-block stage 3 episodes") {
  EnvConfig cfg = base_config(2, RewardMode::Incremental, 3);
  Rng rng(43);
  int successes = 0;
  for (int trial = 0; trial < 10; ++trial) successes += run_scripted(cfg, rng).success;
  CHECK(successes == 10);
}

TEST_CASE("reward formulas match the closed forms") {
  EnvConfig cfg = base_config(3);
  Goal g{Vec{0.2, 0.2, 0.025, 0.3, 0.3, 0.025, 0.15, 0.35, 0.025}};

  // one block in place, gripper near a block
  Vec achieved{0.2, 0.2, 0.025, 0.1, 0.1, 0.025, 0.35, 0.15, 0.025};
  Vec3 near_gripper{0.2, 0.2, 0.05};
  cfg.reward_mode = RewardMode::Incremental;
  CHECK(reward_from_positions(near_gripper, achieved, g, cfg) == -2.0);
  cfg.reward_mode = RewardMode::Binary;
  CHECK(reward_from_positions(near_gripper, achieved, g, cfg) == -1.0);

  // all in place, gripper retreated
  Vec all_placed = g.flat;
  Vec3 far_gripper{0.2, 0.2, 0.3};
  CHECK(reward_from_positions(far_gripper, all_placed, g, cfg) == 1.0);
  cfg.reward_mode = RewardMode::Incremental;
  CHECK(reward_from_positions(far_gripper, all_placed, g, cfg) == 1.0);

  // all in place, gripper still touching
  CHECK(reward_from_positions(near_gripper, all_placed, g, cfg) == 0.0);
}

TEST_CASE("success is a closed ball and ignores the gripper bonus") {
  EnvConfig cfg = base_config(1);
  EnvState s;
  s.block_pos = {{0.2, 0.2, 0.025}};
  s.block_vel = {{0, 0, 0}};
  s.gripper_pos = {0.2, 0.2, 0.025};  // touching, bonus unreachable

  Goal exact{Vec{0.2, 0.2, 0.025}};
  CHECK(is_success(s, exact, cfg));

  Goal boundary{Vec{0.2 + cfg.tolerance, 0.2, 0.025}};
  CHECK(is_success(s, boundary, cfg));  // distance exactly e

  Goal off{Vec{0.2 + 2 * cfg.tolerance, 0.2, 0.025}};
  CHECK(!is_success(s, off, cfg));

  cfg.reward_mode = RewardMode::Binary;
  CHECK(reward_fn(s, exact, cfg) >= 0.0);
}

TEST_CASE("stage 3 resets start with nothing satisfied") {
  EnvConfig cfg = base_config(2, RewardMode::Binary, 3);
  Rng rng(44);
  for (int i = 0; i < 200; ++i) {
    ResetResult r = reset(cfg, rng);
    CHECK(criteria_satisfied_count(achieved_goal(r.state).flat, r.goal, cfg) == 0);
    CHECK(r.state.t == 0);
    // stack targets share (x, y) and occupy consecutive levels
    CHECK(r.goal.criterion(0)[0] == r.goal.criterion(1)[0]);
    CHECK(r.goal.criterion(0)[1] == r.goal.criterion(1)[1]);
    CHECK(r.goal.criterion(1)[2] - r.goal.criterion(0)[2] ==
          doctest::Approx(cfg.block_size));
  }
}

TEST_CASE("stage 2 resets satisfy exactly the advertised number of criteria") {
  EnvConfig cfg = base_config(3, RewardMode::Incremental, 2);
  Rng rng(45);
  std::set<int> seen;
  for (int i = 0; i < 300; ++i) {
    ResetResult r = reset(cfg, rng);
    const int satisfied = criteria_satisfied_count(achieved_goal(r.state).flat, r.goal, cfg);
    CHECK(satisfied == r.info.initially_placed);
    CHECK(satisfied <= cfg.n_blocks - 1);
    seen.insert(satisfied);
  }
  CHECK(seen.count(0) == 1);
  CHECK(seen.count(2) == 1);
}

TEST_CASE("stage 1 air targets appear at the configured rate") {
  EnvConfig cfg = base_config(2, RewardMode::Binary, 1);
  Rng rng(46);
  int air = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) air += reset(cfg, rng).info.air_target;
  const double fraction = static_cast<double>(air) / trials;
  CHECK(fraction > 0.48);
  CHECK(fraction < 0.52);
}

TEST_CASE("achieved goal mirrors block positions") {
  EnvConfig cfg = base_config(2, RewardMode::Binary, 3);
  Rng rng(47);
  ResetResult r = reset(cfg, rng);
  Goal a = achieved_goal(r.state);
  for (int i = 0; i < 2; ++i)
    for (int d = 0; d < 3; ++d)
      CHECK(a.flat[3 * i + d] == r.state.block_pos[i][d]);
  // stage 3: achieved differs from the goal in every criterion
  for (int i = 0; i < 2; ++i)
    CHECK(dist3(a.criterion(i), r.goal.criterion(i)) > cfg.tolerance);
}

TEST_CASE("trajectories are bit-for-bit deterministic") {
  EnvConfig cfg = base_config(2, RewardMode::Incremental, 1);
  auto run = [&](uint64_t seed) {
    Rng rng(seed);
    ResetResult r = reset(cfg, rng);
    EnvState s = r.state;
    Vec trace;
    Rng action_rng(seed + 1);
    for (int t = 0; t < 60; ++t) {
      Action a{action_rng.uniform(-1, 1), action_rng.uniform(-1, 1),
               action_rng.uniform(-1, 1), action_rng.uniform(-1, 1)};
      StepResult sr = step(s, a, r.goal, cfg);
      s = sr.state;
      trace.push_back(sr.reward);
      for (const Vec3& p : s.block_pos)
        trace.insert(trace.end(), p.begin(), p.end());
      trace.insert(trace.end(), s.gripper_pos.begin(), s.gripper_pos.end());
    }
    return trace;
  };
  Vec t1 = run(99), t2 = run(99), t3 = run(100);
  CHECK(t1 == t2);
  CHECK(t1 != t3);
}

TEST_CASE("unheld blocks never sink below the table under random play") {
  EnvConfig cfg = base_config(3, RewardMode::Binary, 1);
  Rng rng(48);
  ResetResult r = reset(cfg, rng);
  EnvState s = r.state;
  for (int t = 0; t < 500; ++t) {
    Action a{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
             rng.uniform(-1, 1)};
    s = step(s, a, r.goal, cfg).state;
    for (int i = 0; i < cfg.n_blocks; ++i) {
      if (i == s.held_block) continue;
      CHECK(s.block_pos[i][2] >= cfg.block_size / 2 - 1e-12);
    }
  }
}

TEST_CASE("observation layout is gripper, claw, then per-block pos and vel") {
  EnvConfig cfg = base_config(2, RewardMode::Binary, 3);
  Rng rng(49);
  ResetResult r = reset(cfg, rng);
  Vec obs = observe(r.state);
  REQUIRE(static_cast<int>(obs.size()) == cfg.obs_dim());
  CHECK(obs[0] == r.state.gripper_pos[0]);
  CHECK(obs[6] == r.state.claw);
  CHECK(obs[7] == r.state.block_pos[0][0]);
  CHECK(obs[13] == r.state.block_pos[1][0]);
  CHECK(gripper_pos_from_obs(obs) == r.state.gripper_pos);
}

TEST_CASE("config validation rejects bad settings") {
  EnvConfig cfg = base_config(1);
  cfg.n_blocks = 5;
  CHECK_THROWS(cfg.validate());
  cfg = base_config(1);
  cfg.tolerance = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = base_config(1);
  cfg.stage = 4;
  CHECK_THROWS(cfg.validate());
  cfg = base_config(2);
  CHECK(cfg.horizon_or_default() == 100);
  cfg.horizon = 70;
  CHECK(cfg.horizon_or_default() == 70);
}
