#include "stackrl/learner.hpp"

#include <algorithm>
#include <cmath>

namespace stackrl::agent {

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Actor make_actor(int in_dim, const LearnerConfig& cfg, double lr, Rng& rng) {
  Actor a;
  a.net = make_mlp(layer_sizes(in_dim, cfg.hidden, cfg.action_dim),
                   OutputActivation::Tanh, cfg.preactivation_penalty, rng);
  a.target = a.net;
  a.opt = AdamState::for_net(a.net, lr);
  return a;
}

Critic make_critic(int in_dim, const LearnerConfig& cfg, double lr, double l2, Rng& rng) {
  Critic c;
  c.net = make_mlp(layer_sizes(in_dim, cfg.hidden, 1), OutputActivation::Identity,
                   0.0, rng);
  c.target = c.net;
  c.head.step_size = cfg.popart_step;
  c.target_head = c.head;
  c.opt = AdamState::for_net(c.net, lr, l2);
  return c;
}

}  // namespace

Learner::Learner(const LearnerConfig& config, uint64_t init_seed)
    : cfg(config),
      obs_stats(config.obs_dim, config.stats_std_floor),
      goal_stats(config.goal_dim, config.stats_std_floor),
      obs_pending(config.obs_dim, config.stats_std_floor),
      goal_pending(config.goal_dim, config.stats_std_floor),
      noise(config.noise) {
  SRL_CHECK(cfg.obs_dim > 0 && cfg.action_dim > 0, "learner: bad dimensions");
  Rng rng(init_seed);
  actors.w_explore = cfg.w_explore;
  actors.w_exploit = cfg.w_exploit;
  actors.exploit = make_actor(cfg.obs_dim + cfg.goal_dim, cfg, cfg.exploit_actor_lr, rng);
  actors.explore = make_actor(cfg.obs_dim, cfg, cfg.explore_actor_lr, rng);
  actors.combined = make_actor(cfg.obs_dim + cfg.goal_dim, cfg, cfg.combined_actor_lr, rng);
  critics.polyak_exploit = cfg.polyak_exploit;
  critics.polyak_explore = cfg.polyak_explore;
  critics.exploit = make_critic(cfg.obs_dim + cfg.goal_dim + cfg.action_dim, cfg,
                                cfg.exploit_critic_lr, cfg.exploit_critic_l2, rng);
  critics.explore = make_critic(cfg.obs_dim + cfg.action_dim, cfg,
                                cfg.explore_critic_lr, cfg.explore_critic_l2, rng);
  dynamics = curiosity::DynamicsModel::make(cfg.obs_dim, cfg.action_dim, cfg.hidden,
                                            cfg.dynamics_lr, rng);
}

Vec Learner::normalize_obs(const Vec& raw) const {
  if (obs_stats.empty()) {
    Vec out = raw;
    for (double& v : out) v = std::clamp(v, -cfg.input_clip, cfg.input_clip);
    return out;
  }
  return obs_stats.normalize_clip(raw, cfg.input_clip);
}

Vec Learner::normalize_goal(const Vec& raw) const {
  if (cfg.goal_dim == 0) return {};
  if (goal_stats.empty()) {
    Vec out = raw;
    for (double& v : out) v = std::clamp(v, -cfg.input_clip, cfg.input_clip);
    return out;
  }
  return goal_stats.normalize_clip(raw, cfg.input_clip);
}

void Learner::observe_rollout(const Vec& raw_obs, const Vec& raw_goal) {
  obs_pending.observe(raw_obs);
  if (cfg.goal_dim > 0) goal_pending.observe(raw_goal);
}

const Mlp& Learner::actor_net(PolicyId id) const {
  switch (id) {
    case PolicyId::Explore: return actors.explore.net;
    case PolicyId::Exploit: return actors.exploit.net;
    case PolicyId::Combined: return actors.combined.net;
  }
  throw std::runtime_error("bad policy id");
}

Vec Learner::policy_action(PolicyId id, const Vec& raw_obs, const Vec& raw_goal,
                           const Mlp* perturbed, bool with_gaussian_noise,
                           Rng* rng) const {
  const Vec obs_n = normalize_obs(raw_obs);
  const Vec goal_n = normalize_goal(raw_goal);
  const Vec* goal_ptr = id == PolicyId::Explore ? nullptr : &goal_n;
  const NoiseConfig* noise_ptr = with_gaussian_noise ? &noise : nullptr;
  return select_action(actors, id, obs_n, goal_ptr, noise_ptr,
                       with_gaussian_noise ? rng : nullptr, perturbed);
}

Matrix Learner::normalized_obs_rows(const std::vector<replay::Transition>& transitions,
                                    bool next) const {
  Matrix rows(static_cast<int>(transitions.size()), cfg.obs_dim);
  for (size_t i = 0; i < transitions.size(); ++i) {
    const Vec& src = next ? transitions[i].next_obs : transitions[i].obs;
    SRL_CHECK(static_cast<int>(src.size()) == cfg.obs_dim, "batch: obs dim mismatch");
    std::copy(src.begin(), src.end(), rows.row(static_cast<int>(i)));
  }
  if (!obs_stats.empty()) obs_stats.normalize_clip_rows(rows, cfg.input_clip);
  return rows;
}

Batch Learner::make_batch(const std::vector<replay::Transition>& transitions) const {
  SRL_CHECK(!transitions.empty(), "make_batch: empty batch");
  const int n = static_cast<int>(transitions.size());
  Batch batch;
  batch.obs = normalized_obs_rows(transitions, false);
  batch.next_obs = normalized_obs_rows(transitions, true);
  batch.goal = Matrix(n, cfg.goal_dim);
  batch.action = Matrix(n, cfg.action_dim);
  batch.reward_env.resize(n);
  batch.reward_explore.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const replay::Transition& tr = transitions[i];
    SRL_CHECK(static_cast<int>(tr.goal.size()) == cfg.goal_dim, "batch: goal dim mismatch");
    SRL_CHECK(static_cast<int>(tr.action.size()) == cfg.action_dim,
              "batch: action dim mismatch");
    std::copy(tr.goal.begin(), tr.goal.end(), batch.goal.row(i));
    std::copy(tr.action.begin(), tr.action.end(), batch.action.row(i));
    batch.reward_env[i] = tr.reward;
  }
  if (cfg.goal_dim > 0 && !goal_stats.empty())
    goal_stats.normalize_clip_rows(batch.goal, cfg.input_clip);
  return batch;
}

TrainStats Learner::train_on_batch(const std::vector<replay::Transition>& transitions) {
  Batch batch = make_batch(transitions);
  TrainStats stats;

  if (cfg.use_curiosity) {
    Matrix dyn_in = hconcat(batch.obs, batch.action);
    curiosity::ScoreResult scored = curiosity::train_and_score(dynamics, dyn_in, batch.next_obs);
    batch.reward_explore = scored.rewards;
    stats.dynamics_loss = scored.loss;
    stats.explore_reward_mean = scored.loss;  // loss is the mean of the rewards
  }

  auto clip_targets = [this](Vec& y) {
    if (cfg.target_clip <= 0.0) return;
    for (double& v : y) v = std::clamp(v, -cfg.target_clip, cfg.target_clip);
  };
  if (cfg.use_curiosity) {
    Targets targets = compute_targets(critics, actors, batch, cfg.gamma);
    clip_targets(targets.exploit);
    CriticUpdateStats crit = update_critics(critics, batch, targets);
    stats.critic_loss_exploit = crit.loss_exploit;
    stats.critic_loss_explore = crit.loss_explore;
    update_actors(actors, critics, batch);
  } else {
    Vec y = compute_exploit_targets(critics, actors, batch, cfg.gamma);
    clip_targets(y);
    Matrix sga = hconcat(batch.obs, batch.goal, batch.action);
    stats.critic_loss_exploit = update_critic(critics.exploit, sga, y);
    update_actor_exploit(actors, critics, batch);
  }

  soft_update_targets(actors, critics);
  return stats;
}

Mlp Learner::draw_perturbed(PolicyId id, Rng& rng) const {
  return perturb_copy(actor_net(id), noise.param_noise_sigma, rng);
}

double Learner::adapt_noise(PolicyId id, const std::vector<replay::Transition>& probe,
                            Rng& rng) {
  if (probe.empty() || !noise.param_noise_enabled) return 0.0;
  Matrix obs = normalized_obs_rows(probe, false);
  Matrix inputs = obs;
  if (id != PolicyId::Explore) {
    Matrix goal(static_cast<int>(probe.size()), cfg.goal_dim);
    for (size_t i = 0; i < probe.size(); ++i)
      std::copy(probe[i].goal.begin(), probe[i].goal.end(),
                goal.row(static_cast<int>(i)));
    if (cfg.goal_dim > 0 && !goal_stats.empty())
      goal_stats.normalize_clip_rows(goal, cfg.input_clip);
    inputs = hconcat(obs, goal);
  }
  Mlp perturbed = draw_perturbed(id, rng);
  const double distance = action_distance(actor_net(id), perturbed, inputs);
  adapt_param_noise(noise, distance);
  return distance;
}

void Learner::visit_tensors(const std::function<void(const std::string&, Matrix&)>& fn) {
  auto visit_net = [&](const std::string& name, Mlp& net) {
    net.bump();  // callers may rewrite tensors in place
    for (int l = 0; l < net.n_layers(); ++l) {
      fn(name + "/" + std::to_string(l) + "/weights", net.weights[l]);
      fn(name + "/" + std::to_string(l) + "/biases", net.biases[l]);
    }
  };
  visit_net("exploit_actor", actors.exploit.net);
  visit_net("exploit_actor_target", actors.exploit.target);
  visit_net("explore_actor", actors.explore.net);
  visit_net("explore_actor_target", actors.explore.target);
  visit_net("combined_actor", actors.combined.net);
  visit_net("combined_actor_target", actors.combined.target);
  visit_net("exploit_critic", critics.exploit.net);
  visit_net("exploit_critic_target", critics.exploit.target);
  visit_net("explore_critic", critics.explore.net);
  visit_net("explore_critic_target", critics.explore.target);
  visit_net("dynamics", dynamics.net);
}

std::vector<Learner::PopArtSlot> Learner::popart_slots() {
  return {{"exploit", &critics.exploit.head, &critics.exploit.net},
          {"exploit_target", &critics.exploit.target_head, &critics.exploit.target},
          {"explore", &critics.explore.head, &critics.explore.net},
          {"explore_target", &critics.explore.target_head, &critics.explore.target}};
}

void Learner::reset_optimizers() {
  actors.exploit.opt.reset();
  actors.explore.opt.reset();
  actors.combined.opt.reset();
  critics.exploit.opt.reset();
  critics.explore.opt.reset();
  dynamics.opt.reset();
}

void Learner::reset_noise() { noise = cfg.noise; }

namespace {

void put_stats(ParamStore& store, const std::string& prefix, const RunningStats& stats) {
  store.put(prefix + "/count", Vec{stats.count});
  store.put(prefix + "/sum", stats.sum);
  store.put(prefix + "/sum_sq", stats.sum_sq);
}

void read_stats(const ParamStore& store, const std::string& prefix, RunningStats& stats) {
  const Vec& count = store.get(prefix + "/count");
  SRL_CHECK(count.size() == 1, "bad stats count array");
  const Vec& sum = store.get(prefix + "/sum");
  const Vec& sum_sq = store.get(prefix + "/sum_sq");
  SRL_CHECK(static_cast<int>(sum.size()) == stats.dim &&
                static_cast<int>(sum_sq.size()) == stats.dim,
            "checkpoint normalizer dimension mismatch");
  stats.count = count[0];
  stats.sum = sum;
  stats.sum_sq = sum_sq;
}

}  // namespace

void Learner::save_checkpoint(const std::string& path) const {
  ParamStore store;
  store.header["format"] = 1;
  store.header["obs_dim"] = cfg.obs_dim;
  store.header["goal_dim"] = cfg.goal_dim;
  store.header["action_dim"] = cfg.action_dim;
  store.header["hidden"] = cfg.hidden;
  put_mlp(store, "exploit_actor", actors.exploit.net);
  put_mlp(store, "exploit_actor_target", actors.exploit.target);
  put_mlp(store, "explore_actor", actors.explore.net);
  put_mlp(store, "explore_actor_target", actors.explore.target);
  put_mlp(store, "combined_actor", actors.combined.net);
  put_mlp(store, "combined_actor_target", actors.combined.target);
  put_mlp(store, "exploit_critic", critics.exploit.net);
  put_mlp(store, "exploit_critic_target", critics.exploit.target);
  put_mlp(store, "explore_critic", critics.explore.net);
  put_mlp(store, "explore_critic_target", critics.explore.target);
  put_mlp(store, "dynamics", dynamics.net);
  auto put_head = [&](const std::string& name, const PopArtHead& h) {
    store.put("popart/" + name, Vec{h.mu, h.sigma, h.second_moment});
  };
  put_head("exploit", critics.exploit.head);
  put_head("exploit_target", critics.exploit.target_head);
  put_head("explore", critics.explore.head);
  put_head("explore_target", critics.explore.target_head);
  put_stats(store, "normalizer/obs", obs_stats);
  put_stats(store, "normalizer/goal", goal_stats);
  store.put("noise/param_sigma", Vec{noise.param_noise_sigma});
  store.save(path);
}

void Learner::load_checkpoint(const std::string& path) {
  ParamStore store = ParamStore::load(path);
  SRL_CHECK(store.header.at("obs_dim").get<int>() == cfg.obs_dim,
            "checkpoint obs_dim does not match configuration");
  SRL_CHECK(store.header.at("goal_dim").get<int>() == cfg.goal_dim,
            "checkpoint goal_dim does not match configuration");
  SRL_CHECK(store.header.at("action_dim").get<int>() == cfg.action_dim,
            "checkpoint action_dim does not match configuration");
  read_mlp(store, "exploit_actor", actors.exploit.net);
  read_mlp(store, "exploit_actor_target", actors.exploit.target);
  read_mlp(store, "explore_actor", actors.explore.net);
  read_mlp(store, "explore_actor_target", actors.explore.target);
  read_mlp(store, "combined_actor", actors.combined.net);
  read_mlp(store, "combined_actor_target", actors.combined.target);
  read_mlp(store, "exploit_critic", critics.exploit.net);
  read_mlp(store, "exploit_critic_target", critics.exploit.target);
  read_mlp(store, "explore_critic", critics.explore.net);
  read_mlp(store, "explore_critic_target", critics.explore.target);
  read_mlp(store, "dynamics", dynamics.net);
  auto read_head = [&](const std::string& name, PopArtHead& h) {
    const Vec& v = store.get("popart/" + name);
    SRL_CHECK(v.size() == 3, "bad popart array");
    h.mu = v[0];
    h.sigma = v[1];
    h.second_moment = v[2];
  };
  read_head("exploit", critics.exploit.head);
  read_head("exploit_target", critics.exploit.target_head);
  read_head("explore", critics.explore.head);
  read_head("explore_target", critics.explore.target_head);
  read_stats(store, "normalizer/obs", obs_stats);
  read_stats(store, "normalizer/goal", goal_stats);
  noise.param_noise_sigma = store.get("noise/param_sigma")[0];
}

}  // namespace stackrl::agent
