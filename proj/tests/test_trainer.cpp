#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "stackrl/config.hpp"
#include "stackrl/trainer.hpp"
#include "support/scripted_policy.hpp"

using namespace stackrl;
using namespace stackrl::trainer;

namespace {

struct Setup {
  blockworld::EnvConfig env;
  TrainConfig train;
  CurriculumSchedule curriculum;
  agent::LearnerConfig learner;
};

Setup tiny_setup(int n_workers, bool curiosity = true) {
  Setup s;
  s.env.n_blocks = 1;
  s.env.reward_mode = blockworld::RewardMode::Binary;
  s.env.stage = 1;
  s.train.n_workers = n_workers;
  s.train.epochs = 1;
  s.train.cycles_per_epoch = 1;
  s.train.episodes_per_cycle = 2;
  s.train.batches_per_cycle = 2;
  s.train.batch_size = 16;
  s.train.test_episodes_per_epoch = 4;
  s.train.window = 8;
  s.train.her_mode = replay::HerMode::MultiCriteria;
  s.curriculum.enabled = true;
  s.curriculum.start_stage = 1;
  s.learner.obs_dim = s.env.obs_dim();
  s.learner.goal_dim = s.env.goal_dim();
  s.learner.action_dim = blockworld::Action::dim;
  s.learner.hidden = {8, 8};
  s.learner.gamma = 1.0 - 1.0 / s.env.horizon_or_default();
  s.learner.use_curiosity = curiosity;
  if (!curiosity)
    s.train.policy_assignment.assign(n_workers, agent::PolicyId::Exploit);
  return s;
}

Trainer make(const Setup& s, uint64_t seed, const std::string& out = "") {
  return Trainer(s.env, s.train, s.curriculum, s.learner, seed, out);
}

std::vector<double> tensor_fingerprint(agent::Learner& learner) {
  std::vector<double> sums;
  learner.visit_tensors([&](const std::string&, Matrix& m) {
    double s = 0.0;
    for (double v : m.data) s += v;
    sums.push_back(s);
  });
  return sums;
}

}  // namespace

TEST_CASE("env step counting is exact") {
  Setup s = tiny_setup(2);
  Trainer t = make(s, 1);
  t.run_cycle();
  // 2 workers x 2 episodes x horizon 50
  CHECK(t.env_steps() == 2ull * 2 * 50);
  t.run_cycle();
  CHECK(t.env_steps() == 2ull * 2ull * 2 * 50);
}

TEST_CASE("after every averaging barrier the workers are bit identical") {
  Setup s = tiny_setup(3);
  Trainer t = make(s, 2);
  t.run_cycle();
  std::vector<std::vector<Matrix*>> tensors(3);
  for (int w = 0; w < 3; ++w)
    t.workers()[w].learner.visit_tensors(
        [&, w](const std::string&, Matrix& m) { tensors[w].push_back(&m); });
  for (size_t i = 0; i < tensors[0].size(); ++i) {
    CHECK(tensors[0][i]->data == tensors[1][i]->data);
    CHECK(tensors[0][i]->data == tensors[2][i]->data);
  }
  for (int w = 1; w < 3; ++w) {
    CHECK(t.workers()[0].learner.critics.exploit.head.sigma ==
          t.workers()[w].learner.critics.exploit.head.sigma);
    CHECK(t.workers()[0].learner.obs_stats.count ==
          t.workers()[w].learner.obs_stats.count);
  }
}

TEST_CASE("averaging with one worker is the identity") {
  Setup s = tiny_setup(1);
  Trainer t = make(s, 3);
  t.run_cycle();
  auto before = tensor_fingerprint(t.workers()[0].learner);
  t.average_parameters();
  auto after = tensor_fingerprint(t.workers()[0].learner);
  CHECK(before == after);
}

TEST_CASE("averaging equals the scalar mean for hand-set parameters") {
  Setup s = tiny_setup(2);
  Trainer t = make(s, 4);
  // hand-divergent copies of one weight
  auto& w0 = t.workers()[0].learner.actors.exploit.net.weights[0];
  auto& w1 = t.workers()[1].learner.actors.exploit.net.weights[0];
  w0.fill(1.0);
  w1.fill(3.0);
  t.average_parameters();
  for (double v : w0.data) CHECK(v == 2.0);
  for (double v : w1.data) CHECK(v == 2.0);
}

TEST_CASE("merged normalizer statistics match a concatenated oracle") {
  Setup s = tiny_setup(2);
  Trainer t = make(s, 5);
  RunningStats oracle(s.learner.obs_dim);

  // feed different observations through each worker's pending stats
  Rng rng(6);
  for (int w = 0; w < 2; ++w) {
    for (int i = 0; i < 100; ++i) {
      Vec obs(s.learner.obs_dim);
      for (double& v : obs) v = rng.uniform(-2, 2);
      t.workers()[w].learner.observe_rollout(obs, Vec(s.learner.goal_dim, 0.0));
      oracle.observe(obs);
    }
  }
  t.average_parameters();
  for (int w = 0; w < 2; ++w) {
    const RunningStats& merged = t.workers()[w].learner.obs_stats;
    CHECK(merged.count == oracle.count);
    for (int i = 0; i < merged.dim; ++i) {
      CHECK(std::fabs(merged.mean()[i] - oracle.mean()[i]) < 1e-9);
      CHECK(std::fabs(merged.stddev()[i] - oracle.stddev()[i]) < 1e-9);
    }
  }
}

TEST_CASE("an untrained agent fails stage 3 and a scripted oracle passes") {
  Setup s = tiny_setup(1);
  s.curriculum.enabled = false;
  s.env.stage = 3;
  s.train.test_episodes_per_epoch = 20;
  s.train.window = 20;
  Trainer t = make(s, 7);

  EpochStats untrained = t.evaluate();
  CHECK(untrained.success_rate == 0.0);

  EpochStats scripted = t.evaluate([&](const blockworld::EnvState& state,
                                       const blockworld::Goal& goal) {
    return testsupport::scripted_stacker_action(state, goal, t.env_config());
  });
  CHECK(scripted.success_rate >= 0.95);
}

TEST_CASE("the test window holds at most its configured size") {
  Setup s = tiny_setup(1);
  s.train.window = 10;
  s.train.test_episodes_per_epoch = 4;
  Trainer t = make(s, 8);
  for (int i = 0; i < 5; ++i) t.evaluate();
  CHECK(t.test_window().size() == 10);
  CHECK(t.test_env_steps() == 5ull * 4 * 50);
}

TEST_CASE("curriculum transition preserves weights and resets the rest") {
  Setup s = tiny_setup(2);
  s.curriculum.threshold_stage1 = 0.9;
  s.train.window = 10;
  Trainer t = make(s, 9);
  t.run_cycle();
  CHECK(t.workers()[0].buffer.size() > 0);

  // below threshold: no transition even with a full window
  t.inject_test_results(std::vector<std::pair<bool, double>>(10, {false, -50.0}));
  CHECK(!t.maybe_advance_stage());
  CHECK(t.stage() == 1);

  auto fingerprint = tensor_fingerprint(t.workers()[0].learner);
  t.workers()[0].learner.noise.param_noise_sigma = 0.7;
  t.inject_test_results(std::vector<std::pair<bool, double>>(10, {true, 0.0}));
  CHECK(t.maybe_advance_stage());
  CHECK(t.stage() == 2);
  // a second call must not fire again: the window was cleared
  CHECK(!t.maybe_advance_stage());
  CHECK(t.stage() == 2);

  for (auto& w : t.workers()) {
    CHECK(w.buffer.size() == 0);
    CHECK(w.learner.actors.exploit.opt.step == 0);
    CHECK(w.learner.critics.exploit.opt.step == 0);
    CHECK(w.learner.noise.param_noise_sigma ==
          w.learner.cfg.noise.param_noise_sigma);
  }
  CHECK(tensor_fingerprint(t.workers()[0].learner) == fingerprint);

  // terminal stage: no transition out of stage 3
  t.inject_test_results(std::vector<std::pair<bool, double>>(10, {true, 0.0}));
  t.maybe_advance_stage();
  CHECK(t.stage() == 3);
  t.inject_test_results(std::vector<std::pair<bool, double>>(10, {true, 0.0}));
  CHECK(!t.maybe_advance_stage());
  CHECK(t.stage() == 3);
}

TEST_CASE("single-worker runs are exactly reproducible") {
  auto fingerprint_run = [](bool parallel) {
    Setup s = tiny_setup(1);
    s.train.parallel_workers = parallel;
    s.train.cycles_per_epoch = 2;
    Trainer t = make(s, 42);
    EpochStats e = t.run_epoch();
    std::vector<double> fp = tensor_fingerprint(t.workers()[0].learner);
    fp.push_back(e.success_rate);
    fp.push_back(e.mean_episode_reward);
    fp.push_back(e.critic_loss_exploit);
    fp.push_back(static_cast<double>(e.env_steps));
    return fp;
  };
  auto a = fingerprint_run(false);
  auto b = fingerprint_run(false);
  CHECK(a == b);
  auto c = fingerprint_run(true);
  CHECK(a == c);
}

TEST_CASE("multi-worker runs are reproducible despite threading") {
  auto fingerprint_run = [] {
    Setup s = tiny_setup(3);
    s.train.parallel_workers = true;
    Trainer t = make(s, 43);
    t.run_cycle();
    return tensor_fingerprint(t.workers()[0].learner);
  };
  CHECK(fingerprint_run() == fingerprint_run());
}

TEST_CASE("without curiosity the explore family stays untouched") {
  Setup s = tiny_setup(2, /*curiosity=*/false);
  Trainer t = make(s, 44);
  Mlp explore_before = t.workers()[0].learner.actors.explore.net;
  Mlp dynamics_before = t.workers()[0].learner.dynamics.net;
  t.run_cycle();
  CHECK(t.workers()[0].learner.actors.explore.net.weights[0].data ==
        explore_before.weights[0].data);
  CHECK(t.workers()[0].learner.dynamics.net.weights[0].data ==
        dynamics_before.weights[0].data);
}

TEST_CASE("trainer writes csv metrics and checkpoints") {
  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "stackrl_trainer_test").string();
  fs::remove_all(dir);
  Setup s = tiny_setup(1);
  Trainer t = make(s, 45, dir);
  t.run_epoch();
  CHECK(fs::exists(dir + "/metrics.csv"));
  CHECK(fs::exists(dir + "/checkpoints/epoch_1.ckpt"));
  CHECK(fs::exists(dir + "/checkpoints/latest.ckpt"));
  std::ifstream csv(dir + "/metrics.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header ==
        "epoch,env_steps,test_env_steps,stage,success_rate,mean_episode_reward,"
        "critic_loss_exploit,critic_loss_explore,dynamics_loss,explore_reward_mean");
  fs::remove_all(dir);
}
