#pragma once

#include "stackrl/agent.hpp"
#include "stackrl/curiosity.hpp"
#include "stackrl/param_store.hpp"
#include "stackrl/replay.hpp"

namespace stackrl::agent {

struct LearnerConfig {
  int obs_dim = 0;
  int goal_dim = 0;
  int action_dim = 0;
  std::vector<int> hidden = {256, 256, 256};
  double exploit_critic_lr = 1e-3, exploit_critic_l2 = 0.0;
  double exploit_actor_lr = 1e-3;
  double explore_critic_lr = 1e-3, explore_critic_l2 = 0.01;
  double explore_actor_lr = 1e-3;
  double combined_actor_lr = 1e-3;
  double dynamics_lr = 7e-3;
  double polyak_exploit = 1e-3;
  double polyak_explore = 0.05;
  double w_explore = 0.5, w_exploit = 0.5;
  double preactivation_penalty = 1e-3;
  double popart_step = 1e-3;
  double gamma = 0.98;
  bool use_curiosity = true;
  // Bootstrapped exploit targets are clamped to [-target_clip, target_clip]
  // when positive; the feasible-return bound max|r| / (1 - gamma). 0 disables.
  double target_clip = 0.0;
  double input_clip = 5.0;
  double stats_std_floor = 1e-2;
  NoiseConfig noise;
};

struct TrainStats {
  double critic_loss_exploit = 0.0;
  double critic_loss_explore = 0.0;
  double dynamics_loss = 0.0;
  double explore_reward_mean = 0.0;
};

/// One worker's full network set: three actors, two PopArt critics, the
/// dynamics model, input normalizers and exploration-noise state. All
/// mutation is single-threaded; cross-worker consistency is the trainer's
/// job at the averaging barrier.
class Learner {
 public:
  LearnerConfig cfg;
  ActorSet actors;
  CriticSet critics;
  curiosity::DynamicsModel dynamics;
  RunningStats obs_stats, goal_stats;      // synchronized across workers
  RunningStats obs_pending, goal_pending;  // local increments since last merge
  NoiseConfig noise;

  Learner(const LearnerConfig& config, uint64_t init_seed);

  Vec normalize_obs(const Vec& raw) const;
  Vec normalize_goal(const Vec& raw) const;
  void observe_rollout(const Vec& raw_obs, const Vec& raw_goal);

  const Mlp& actor_net(PolicyId id) const;
  /// Action for a raw (unnormalized) observation/goal, with optional
  /// parameter-noise override and Gaussian action noise.
  Vec policy_action(PolicyId id, const Vec& raw_obs, const Vec& raw_goal,
                    const Mlp* perturbed, bool with_gaussian_noise, Rng* rng) const;

  Batch make_batch(const std::vector<replay::Transition>& transitions) const;
  TrainStats train_on_batch(const std::vector<replay::Transition>& transitions);

  Mlp draw_perturbed(PolicyId id, Rng& rng) const;
  /// Measures the clean-vs-perturbed action gap on probe observations and
  /// adapts the noise scale. Returns the measured distance.
  double adapt_noise(PolicyId id, const std::vector<replay::Transition>& probe, Rng& rng);

  /// Visits every parameter tensor (live, target and dynamics) in a fixed
  /// order shared by all workers.
  void visit_tensors(const std::function<void(const std::string&, Matrix&)>& fn);

  struct PopArtSlot {
    std::string name;
    PopArtHead* head;
    Mlp* critic;
  };
  std::vector<PopArtSlot> popart_slots();

  void reset_optimizers();
  void reset_noise();

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  Matrix normalized_obs_rows(const std::vector<replay::Transition>& transitions,
                             bool next) const;
};

}  // namespace stackrl::agent
