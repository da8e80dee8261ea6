#include "stackrl/agent.hpp"

#include <algorithm>
#include <cmath>

namespace stackrl::agent {

const char* policy_name(PolicyId id) {
  switch (id) {
    case PolicyId::Explore: return "e";
    case PolicyId::Exploit: return "r";
    case PolicyId::Combined: return "c";
  }
  return "?";
}

PolicyId policy_from_name(const std::string& name) {
  if (name == "e" || name == "explore") return PolicyId::Explore;
  if (name == "r" || name == "exploit") return PolicyId::Exploit;
  if (name == "c" || name == "combined") return PolicyId::Combined;
  throw std::runtime_error("unknown policy name: " + name);
}

Vec select_action(const ActorSet& actors, PolicyId id, const Vec& obs_norm,
                  const Vec* goal_norm, const NoiseConfig* noise, Rng* rng,
                  const Mlp* perturbed_override) {
  const bool needs_goal = id != PolicyId::Explore;
  SRL_CHECK(!needs_goal || goal_norm != nullptr,
            "select_action: goal required for goal-conditioned policy");

  const Mlp* net = perturbed_override;
  if (!net) {
    switch (id) {
      case PolicyId::Explore: net = &actors.explore.net; break;
      case PolicyId::Exploit: net = &actors.exploit.net; break;
      case PolicyId::Combined: net = &actors.combined.net; break;
    }
  }

  Vec input = obs_norm;
  if (needs_goal) input.insert(input.end(), goal_norm->begin(), goal_norm->end());
  Vec action = forward_vec(*net, input);
  if (noise && rng && noise->gaussian_action_sigma > 0.0) {
    for (double& a : action) a += rng->normal(0.0, noise->gaussian_action_sigma);
  }
  for (double& a : action) a = std::clamp(a, -1.0, 1.0);
  return action;
}

namespace {

// y_i = r_i + gamma * denormalize(target_critic(next_state_inputs, a'))
Vec bootstrap_targets(const Mlp& target_actor, const Mlp& target_critic,
                      const PopArtHead& target_head, const Matrix& actor_inputs,
                      const Matrix& critic_state_inputs, const Vec& rewards,
                      double gamma) {
  ForwardCache a_cache = forward(target_actor, actor_inputs);
  Matrix critic_in = hconcat(critic_state_inputs, a_cache.output());
  ForwardCache q_cache = forward(target_critic, critic_in);
  const Matrix& q = q_cache.output();
  Vec y(rewards.size());
  for (size_t i = 0; i < rewards.size(); ++i)
    y[i] = rewards[i] + gamma * target_head.denormalize(q.at(static_cast<int>(i), 0));
  return y;
}

}  // namespace

Vec compute_exploit_targets(const CriticSet& critics, const ActorSet& actors,
                            const Batch& batch, double gamma) {
  Matrix next_sg = hconcat(batch.next_obs, batch.goal);
  return bootstrap_targets(actors.exploit.target, critics.exploit.target,
                           critics.exploit.target_head, next_sg, next_sg,
                           batch.reward_env, gamma);
}

Vec compute_explore_targets(const CriticSet& critics, const ActorSet& actors,
                            const Batch& batch, double gamma) {
  return bootstrap_targets(actors.explore.target, critics.explore.target,
                           critics.explore.target_head, batch.next_obs, batch.next_obs,
                           batch.reward_explore, gamma);
}

Targets compute_targets(const CriticSet& critics, const ActorSet& actors,
                        const Batch& batch, double gamma) {
  return Targets{compute_exploit_targets(critics, actors, batch, gamma),
                 compute_explore_targets(critics, actors, batch, gamma)};
}

double update_critic(Critic& critic, const Matrix& inputs, const Vec& targets) {
  SRL_CHECK(static_cast<int>(targets.size()) == inputs.rows,
            "update_critic: target count mismatch");
  popart_update(critic.head, critic.net, targets);

  ForwardCache cache = forward(critic.net, inputs);
  const Matrix& n_out = cache.output();
  const int n = inputs.rows;
  Matrix d_out(n, 1);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double residual = n_out.at(i, 0) - critic.head.normalize_target(targets[i]);
    loss += residual * residual;
    d_out.at(i, 0) = 2.0 * residual / n;
  }
  loss /= n;

  Gradients grads = backward(critic.net, cache, d_out);
  adam_step(critic.net, grads, critic.opt);
  return loss;
}

CriticUpdateStats update_critics(CriticSet& critics, const Batch& batch,
                                 const Targets& targets) {
  CriticUpdateStats stats;
  Matrix sga = hconcat(batch.obs, batch.goal, batch.action);
  stats.loss_exploit = update_critic(critics.exploit, sga, targets.exploit);
  Matrix sa = hconcat(batch.obs, batch.action);
  stats.loss_explore = update_critic(critics.explore, sa, targets.explore);
  return stats;
}

void actor_ascent_step(Actor& actor, const Matrix& actor_inputs,
                       const ActionEvaluator& evaluator) {
  ForwardCache cache = forward(actor.net, actor_inputs);
  ActionObjective objective = evaluator(cache.output());
  SRL_CHECK(objective.d_action.rows == actor_inputs.rows &&
                objective.d_action.cols == actor.net.output_dim(),
            "actor_ascent_step: objective gradient shape mismatch");
  // Descend on -J; the penalty gradient is injected by backward().
  scale_inplace(objective.d_action, -1.0);
  Gradients grads = backward(actor.net, cache, objective.d_action);
  adam_step(actor.net, grads, actor.opt);
}

ActionEvaluator critic_objective(const Mlp& critic_net, const Matrix& critic_state_inputs,
                                 double weight) {
  return [&critic_net, critic_state_inputs, weight](const Matrix& actions) {
    Matrix critic_in = hconcat(critic_state_inputs, actions);
    ForwardCache cache = forward(critic_net, critic_in);
    const Matrix& q = cache.output();
    const int n = actions.rows;
    ActionObjective out;
    for (int i = 0; i < n; ++i) out.value += q.at(i, 0);
    out.value *= weight / n;
    Matrix seed(n, 1);
    seed.fill(weight / n);
    Gradients grads = backward(critic_net, cache, seed, /*want_params=*/false);
    out.d_action = slice_cols(grads.input, critic_state_inputs.cols,
                              critic_state_inputs.cols + actions.cols);
    return out;
  };
}

void update_actor_exploit(ActorSet& actors, const CriticSet& critics, const Batch& batch) {
  Matrix sg = hconcat(batch.obs, batch.goal);
  actor_ascent_step(actors.exploit, sg, critic_objective(critics.exploit.net, sg));
}

void update_actor_explore(ActorSet& actors, const CriticSet& critics, const Batch& batch) {
  actor_ascent_step(actors.explore, batch.obs,
                    critic_objective(critics.explore.net, batch.obs));
}

void update_actor_combined(ActorSet& actors, const CriticSet& critics, const Batch& batch) {
  Matrix sg = hconcat(batch.obs, batch.goal);
  auto explore_eval = critic_objective(critics.explore.net, batch.obs, actors.w_explore);
  auto exploit_eval = critic_objective(critics.exploit.net, sg, actors.w_exploit);
  auto combined = [&](const Matrix& actions) {
    ActionObjective e = explore_eval(actions);
    ActionObjective r = exploit_eval(actions);
    e.value += r.value;
    add_inplace(e.d_action, r.d_action);
    return e;
  };
  actor_ascent_step(actors.combined, sg, combined);
}

void update_actors(ActorSet& actors, const CriticSet& critics, const Batch& batch) {
  update_actor_exploit(actors, critics, batch);
  update_actor_explore(actors, critics, batch);
  update_actor_combined(actors, critics, batch);
}

void soft_update(Mlp& target, const Mlp& live, double tau) {
  SRL_CHECK(target.layer_sizes == live.layer_sizes, "soft_update: topology mismatch");
  for (int l = 0; l < target.n_layers(); ++l) {
    for (size_t i = 0; i < target.weights[l].data.size(); ++i)
      target.weights[l].data[i] =
          (1.0 - tau) * target.weights[l].data[i] + tau * live.weights[l].data[i];
    for (size_t i = 0; i < target.biases[l].data.size(); ++i)
      target.biases[l].data[i] =
          (1.0 - tau) * target.biases[l].data[i] + tau * live.biases[l].data[i];
  }
  target.bump();
}

void soft_update_head(PopArtHead& target, const PopArtHead& live, double tau) {
  target.mu = (1.0 - tau) * target.mu + tau * live.mu;
  target.sigma = (1.0 - tau) * target.sigma + tau * live.sigma;
  target.second_moment = (1.0 - tau) * target.second_moment + tau * live.second_moment;
}

void soft_update_targets(ActorSet& actors, CriticSet& critics) {
  soft_update(actors.exploit.target, actors.exploit.net, critics.polyak_exploit);
  soft_update(actors.combined.target, actors.combined.net, critics.polyak_exploit);
  soft_update(actors.explore.target, actors.explore.net, critics.polyak_explore);
  soft_update(critics.exploit.target, critics.exploit.net, critics.polyak_exploit);
  soft_update_head(critics.exploit.target_head, critics.exploit.head,
                   critics.polyak_exploit);
  soft_update(critics.explore.target, critics.explore.net, critics.polyak_explore);
  soft_update_head(critics.explore.target_head, critics.explore.head,
                   critics.polyak_explore);
}

Mlp perturb_copy(const Mlp& actor, double sigma, Rng& rng) {
  Mlp copy = actor;
  for (int l = 0; l < copy.n_layers(); ++l) {
    for (double& v : copy.weights[l].data) v += rng.normal(0.0, sigma);
    for (double& v : copy.biases[l].data) v += rng.normal(0.0, sigma);
  }
  copy.bump();
  return copy;
}

double action_distance(const Mlp& a, const Mlp& b, const Matrix& inputs) {
  ForwardCache ca = forward(a, inputs);
  ForwardCache cb = forward(b, inputs);
  const Matrix& out_a = ca.output();
  const Matrix& out_b = cb.output();
  double total = 0.0;
  for (int i = 0; i < inputs.rows; ++i) {
    double sq = 0.0;
    for (int j = 0; j < out_a.cols; ++j) {
      const double d = out_a.at(i, j) - out_b.at(i, j);
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return total / inputs.rows;
}

double adapt_param_noise(NoiseConfig& noise, double distance) {
  SRL_CHECK(distance >= 0.0, "adapt_param_noise: distance must be non-negative");
  if (distance < noise.param_noise_sigma_target)
    noise.param_noise_sigma *= 1.01;
  else
    noise.param_noise_sigma /= 1.01;
  return noise.param_noise_sigma;
}

}  // namespace stackrl::agent
