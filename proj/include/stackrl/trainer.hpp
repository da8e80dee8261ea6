#pragma once

#include <deque>
#include <optional>
#include <string>

#include "stackrl/blockworld.hpp"
#include "stackrl/learner.hpp"
#include "stackrl/replay.hpp"

namespace stackrl::trainer {

struct TrainConfig {
  int n_workers = 2;
  std::vector<agent::PolicyId> policy_assignment;  // resolved to n_workers entries
  int epochs = 10;
  int cycles_per_epoch = 50;
  int episodes_per_cycle = 8;  // per worker
  int batches_per_cycle = 8;
  int batch_size = 1024;  // per worker
  int test_episodes_per_epoch = 50;
  size_t buffer_capacity = 1000000;
  replay::HerMode her_mode = replay::HerMode::MultiCriteria;
  double her_z = 0.8;
  uint64_t max_env_steps = 0;        // 0 disables the budget stop
  double stop_success_threshold = 0; // 0 disables the early-success stop
  int window = 100;                  // sliding window of test episodes
  bool parallel_workers = true;
};

struct CurriculumSchedule {
  bool enabled = true;
  int start_stage = 1;
  double threshold_stage1 = 0.9;
  double threshold_stage2 = 0.9;
};

struct EpochStats {
  int epoch = 0;
  uint64_t env_steps = 0;       // training steps only
  uint64_t test_env_steps = 0;  // reported separately
  int stage = 1;
  double success_rate = 0.0;         // sliding window
  double mean_episode_reward = 0.0;  // sliding window
  double critic_loss_exploit = 0.0;
  double critic_loss_explore = 0.0;
  double dynamics_loss = 0.0;
  double explore_reward_mean = 0.0;
};

struct Worker {
  int index = 0;
  agent::PolicyId policy = agent::PolicyId::Exploit;
  agent::Learner learner;
  replay::ReplayBuffer buffer;
  Rng env_rng;
  Rng noise_rng;

  Worker(int idx, agent::PolicyId pol, agent::Learner l, replay::ReplayBuffer buf,
         Rng env, Rng noise)
      : index(idx), policy(pol), learner(std::move(l)), buffer(std::move(buf)),
        env_rng(env), noise_rng(noise) {}
};

/// Policy override for evaluation, e.g. a scripted oracle in tests.
using EvalPolicy =
    std::function<Vec(const blockworld::EnvState&, const blockworld::Goal&)>;

struct TestSummary {
  double success_rate = 0.0;
  double mean_episode_reward = 0.0;
  std::vector<uint8_t> successes;
  std::vector<double> episode_rewards;
};

/// Noiseless rollouts with the exploit policy (or an override) on the given
/// environment configuration.
TestSummary run_test_episodes(const agent::Learner& learner,
                              const blockworld::EnvConfig& env, int episodes, Rng& rng,
                              const EvalPolicy& override_policy = nullptr);

/// Synchronized multi-worker training loop: per cycle, every worker gathers
/// episodes with its assigned policy, then runs HER-augmented batch updates
/// with a cross-worker parameter averaging barrier after every batch.
class Trainer {
 public:
  Trainer(blockworld::EnvConfig env, TrainConfig train, CurriculumSchedule curriculum,
          agent::LearnerConfig learner_cfg, uint64_t seed, std::string out_dir = "");

  void run_cycle();
  /// Cycles, evaluation with the exploit policy, and a possible curriculum
  /// transition. Appends to the CSV when an output directory is set.
  EpochStats run_epoch();
  std::vector<EpochStats> run();

  EpochStats evaluate(const EvalPolicy& override_policy = nullptr);
  bool maybe_advance_stage();
  void average_parameters();
  void sync_normalizers();

  std::vector<Worker>& workers() { return workers_; }
  const blockworld::EnvConfig& env_config() const { return env_; }
  int stage() const { return env_.stage; }
  uint64_t env_steps() const { return env_steps_; }
  uint64_t test_env_steps() const { return test_env_steps_; }
  const std::deque<std::pair<uint8_t, double>>& test_window() const { return window_; }
  /// Test hook: fills the sliding window with synthetic results.
  void inject_test_results(const std::vector<std::pair<bool, double>>& results);
  void save_checkpoint(const std::string& path) const;

 private:
  blockworld::EnvConfig env_;
  TrainConfig train_;
  CurriculumSchedule curriculum_;
  std::vector<Worker> workers_;
  Rng eval_rng_;
  uint64_t env_steps_ = 0;
  uint64_t test_env_steps_ = 0;
  int epoch_ = 0;
  std::deque<std::pair<uint8_t, double>> window_;
  std::string out_dir_;
  bool csv_started_ = false;
  // epoch accumulators for training diagnostics
  double acc_loss_exploit_ = 0, acc_loss_explore_ = 0, acc_loss_dyn_ = 0, acc_expl_reward_ = 0;
  int64_t acc_batches_ = 0;

  void rollout_phase();
  void update_phase();
  void adapt_noise_phase();
  void parallel_for_workers(const std::function<void(Worker&)>& fn);
  void merge_pending_stats();
  void write_csv_row(const EpochStats& stats);
  EpochStats window_stats() const;
};

}  // namespace stackrl::trainer
