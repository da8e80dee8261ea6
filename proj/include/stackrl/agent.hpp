#pragma once

#include <functional>
#include <optional>

#include "stackrl/adam.hpp"
#include "stackrl/normalize.hpp"

namespace stackrl::agent {

enum class PolicyId { Explore, Exploit, Combined };

const char* policy_name(PolicyId id);
PolicyId policy_from_name(const std::string& name);

struct NoiseConfig {
  bool param_noise_enabled = true;
  double param_noise_sigma_target = 0.1;
  double param_noise_sigma = 0.1;  // adaptive current value
  double gaussian_action_sigma = 0.04;
};

struct Actor {
  Mlp net;
  Mlp target;
  AdamState opt;
};

struct Critic {
  Mlp net;
  Mlp target;
  PopArtHead head;
  PopArtHead target_head;
  AdamState opt;
};

/// The three policies: exploit pi_r(obs, goal), explore pi_e(obs) and
/// combined pi_c(obs, goal), each with a slow target copy.
struct ActorSet {
  Actor exploit;
  Actor explore;
  Actor combined;
  double w_explore = 0.5;
  double w_exploit = 0.5;
};

/// Exploit critic scores (obs, goal, action); explore critic scores
/// (obs, action) and never sees goals.
struct CriticSet {
  Critic exploit;
  Critic explore;
  double polyak_exploit = 0.001;
  double polyak_explore = 0.05;
};

/// Normalized network inputs plus the two reward streams for one batch.
struct Batch {
  Matrix obs;       // N x obs_dim, normalized + clipped
  Matrix goal;      // N x goal_dim, normalized + clipped
  Matrix action;    // N x action_dim, raw
  Matrix next_obs;  // N x obs_dim, normalized + clipped
  Vec reward_env;
  Vec reward_explore;
  int size() const { return obs.rows; }
};

/// Forward pass of the chosen actor with optional Gaussian action noise,
/// clamped to [-1, 1]. When parameter noise is active the caller passes the
/// perturbed copy of the actor. Goal is required for exploit/combined.
Vec select_action(const ActorSet& actors, PolicyId id, const Vec& obs_norm,
                  const Vec* goal_norm, const NoiseConfig* noise, Rng* rng,
                  const Mlp* perturbed_override = nullptr);

struct Targets {
  Vec exploit;  // r_env + gamma * denormalized target exploit critic
  Vec explore;  // r_explore + gamma * denormalized target explore critic
};

Targets compute_targets(const CriticSet& critics, const ActorSet& actors,
                        const Batch& batch, double gamma);
Vec compute_exploit_targets(const CriticSet& critics, const ActorSet& actors,
                            const Batch& batch, double gamma);
Vec compute_explore_targets(const CriticSet& critics, const ActorSet& actors,
                            const Batch& batch, double gamma);

/// One normalized-loss Adam step for a critic: refreshes its PopArt head on
/// the batch targets (rewriting the top layer), then descends
/// mean((normalized_target - n(inputs))^2). Returns the loss.
double update_critic(Critic& critic, const Matrix& inputs, const Vec& targets);

struct CriticUpdateStats {
  double loss_exploit = 0.0;
  double loss_explore = 0.0;
};
CriticUpdateStats update_critics(CriticSet& critics, const Batch& batch,
                                 const Targets& targets);

/// Differentiable objective over a batch of actions: J and dJ/da rows.
struct ActionObjective {
  double value = 0.0;
  Matrix d_action;
};
using ActionEvaluator = std::function<ActionObjective(const Matrix& actions)>;

/// One ascent step of the actor on evaluator(actor(inputs)); the
/// preactivation penalty configured on the actor is applied as well.
void actor_ascent_step(Actor& actor, const Matrix& actor_inputs,
                       const ActionEvaluator& evaluator);

/// Critic-backed objective: mean over the batch of the normalized critic
/// evaluated at (critic_state_inputs, a). `weight` scales the objective.
ActionEvaluator critic_objective(const Mlp& critic_net, const Matrix& critic_state_inputs,
                                 double weight = 1.0);

void update_actor_exploit(ActorSet& actors, const CriticSet& critics, const Batch& batch);
void update_actor_explore(ActorSet& actors, const CriticSet& critics, const Batch& batch);
void update_actor_combined(ActorSet& actors, const CriticSet& critics, const Batch& batch);
void update_actors(ActorSet& actors, const CriticSet& critics, const Batch& batch);

void soft_update(Mlp& target, const Mlp& live, double tau);
void soft_update_head(PopArtHead& target, const PopArtHead& live, double tau);
/// Polyak step for every target net; the combined actor follows the exploit
/// coefficient. Target PopArt statistics follow the same rule.
void soft_update_targets(ActorSet& actors, CriticSet& critics);

/// Copy of an actor with N(0, sigma) added to every parameter.
Mlp perturb_copy(const Mlp& actor, double sigma, Rng& rng);

/// Mean Euclidean action gap between two actors over probe inputs.
double action_distance(const Mlp& a, const Mlp& b, const Matrix& inputs);

/// Multiplicative sigma adaptation toward the target action distance:
/// grows by 1.01 when distance < target, otherwise shrinks.
double adapt_param_noise(NoiseConfig& noise, double distance);

}  // namespace stackrl::agent
