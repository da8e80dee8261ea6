#include "stackrl/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

namespace stackrl::trainer {

namespace bw = stackrl::blockworld;

TestSummary run_test_episodes(const agent::Learner& learner, const bw::EnvConfig& env,
                              int episodes, Rng& rng, const EvalPolicy& override_policy) {
  SRL_CHECK(episodes > 0, "run_test_episodes: episodes must be positive");
  TestSummary summary;
  const int horizon = env.horizon_or_default();
  for (int ep = 0; ep < episodes; ++ep) {
    bw::ResetResult r = bw::reset(env, rng);
    bw::EnvState state = r.state;
    double ep_reward = 0.0;
    bool success = false;
    for (int t = 0; t < horizon; ++t) {
      Vec a = override_policy
                  ? override_policy(state, r.goal)
                  : learner.policy_action(agent::PolicyId::Exploit, bw::observe(state),
                                          r.goal.flat, nullptr, false, nullptr);
      bw::StepResult sr = bw::step(state, bw::Action::from_vec(a), r.goal, env);
      state = sr.state;
      ep_reward += sr.reward;
      if (t + 1 == horizon) success = sr.info.is_success;
    }
    summary.successes.push_back(success ? 1 : 0);
    summary.episode_rewards.push_back(ep_reward);
    summary.success_rate += success ? 1.0 : 0.0;
    summary.mean_episode_reward += ep_reward;
  }
  summary.success_rate /= episodes;
  summary.mean_episode_reward /= episodes;
  return summary;
}

namespace {

std::vector<agent::PolicyId> default_assignment(int n_workers, bool use_curiosity) {
  std::vector<agent::PolicyId> assignment(n_workers, agent::PolicyId::Exploit);
  if (use_curiosity) {
    const int n_combined = (n_workers + 1) / 2;  // half combined, half exploit
    for (int i = 0; i < n_combined; ++i) assignment[i] = agent::PolicyId::Combined;
  }
  return assignment;
}

}  // namespace

Trainer::Trainer(bw::EnvConfig env, TrainConfig train, CurriculumSchedule curriculum,
                 agent::LearnerConfig learner_cfg, uint64_t seed, std::string out_dir)
    : env_(env), train_(train), curriculum_(curriculum), eval_rng_(0),
      out_dir_(std::move(out_dir)) {
  env_.validate();
  SRL_CHECK(train_.n_workers >= 1, "n_workers must be at least 1");
  SRL_CHECK(train_.episodes_per_cycle >= 1 && train_.batches_per_cycle >= 1 &&
                train_.cycles_per_epoch >= 1 && train_.batch_size >= 1,
            "cycle counts must be at least 1");
  env_.stage = curriculum_.enabled ? curriculum_.start_stage : env_.stage;

  Rng master(seed);
  const uint64_t learner_seed = master.fork(1).raw();
  eval_rng_ = master.fork(2);
  if (train_.policy_assignment.empty())
    train_.policy_assignment = default_assignment(train_.n_workers, learner_cfg.use_curiosity);
  SRL_CHECK(static_cast<int>(train_.policy_assignment.size()) == train_.n_workers,
            "policy assignment length must equal n_workers");
  if (!learner_cfg.use_curiosity)
    for (agent::PolicyId p : train_.policy_assignment)
      SRL_CHECK(p == agent::PolicyId::Exploit,
                "without curiosity all workers must use the exploit policy");

  replay::GoalLayout layout{env_.n_blocks, 3};
  for (int i = 0; i < train_.n_workers; ++i) {
    Rng worker_master = master.fork(100 + i);
    workers_.emplace_back(
        i, train_.policy_assignment[i], agent::Learner(learner_cfg, learner_seed),
        replay::ReplayBuffer(train_.buffer_capacity, layout, worker_master.fork(1)),
        worker_master.fork(2), worker_master.fork(3));
  }

  if (!out_dir_.empty()) {
    std::filesystem::create_directories(out_dir_);
    std::filesystem::create_directories(out_dir_ + "/checkpoints");
  }
}

void Trainer::parallel_for_workers(const std::function<void(Worker&)>& fn) {
  if (!train_.parallel_workers || train_.n_workers == 1) {
    for (Worker& w : workers_) fn(w);
    return;
  }
  std::vector<std::exception_ptr> errors(workers_.size());
  std::vector<std::thread> threads;
  threads.reserve(workers_.size());
  for (size_t i = 0; i < workers_.size(); ++i) {
    threads.emplace_back([&, i] {
      try {
        fn(workers_[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw std::runtime_error("worker " + std::to_string(i) + " failed: " + e.what());
      }
    }
  }
}

void Trainer::rollout_phase() {
  const int horizon = env_.horizon_or_default();
  parallel_for_workers([&](Worker& w) {
    for (int ep = 0; ep < train_.episodes_per_cycle; ++ep) {
      bw::ResetResult r = bw::reset(env_, w.env_rng);
      bw::EnvState state = r.state;
      std::optional<Mlp> perturbed;
      if (w.learner.noise.param_noise_enabled)
        perturbed = w.learner.draw_perturbed(w.policy, w.noise_rng);
      replay::Episode episode;
      episode.steps.reserve(horizon);
      for (int t = 0; t < horizon; ++t) {
        const Vec obs = bw::observe(state);
        w.learner.observe_rollout(obs, r.goal.flat);
        const Vec a = w.learner.policy_action(
            w.policy, obs, r.goal.flat, perturbed ? &*perturbed : nullptr, true,
            &w.noise_rng);
        bw::StepResult sr = bw::step(state, bw::Action::from_vec(a), r.goal, env_);
        replay::Transition tr;
        tr.obs = obs;
        tr.goal = r.goal.flat;
        tr.action = a;
        tr.reward = sr.reward;
        tr.next_obs = bw::observe(sr.state);
        tr.achieved_next = bw::achieved_goal(sr.state).flat;
        tr.t = t;
        episode.steps.push_back(std::move(tr));
        state = sr.state;
      }
      w.learner.observe_rollout(bw::observe(state), r.goal.flat);
      w.buffer.store_episode(std::move(episode));
    }
  });
  env_steps_ += static_cast<uint64_t>(train_.n_workers) * train_.episodes_per_cycle * horizon;
}

void Trainer::update_phase() {
  std::vector<agent::TrainStats> stats(workers_.size());
  for (int k = 0; k < train_.batches_per_cycle; ++k) {
    parallel_for_workers([&](Worker& w) {
      replay::RewardRecompute recompute = [this](const replay::Transition& tr,
                                                 const Vec& new_goal) {
        bw::Goal g{new_goal};
        return bw::reward_from_positions(bw::gripper_pos_from_obs(tr.next_obs),
                                         tr.achieved_next, g, env_);
      };
      replay::SampledBatch batch =
          w.buffer.sample_batch(train_.batch_size, train_.her_z, train_.her_mode, recompute);
      stats[w.index] = w.learner.train_on_batch(batch.items);
    });
    average_parameters();
    for (const agent::TrainStats& s : stats) {
      acc_loss_exploit_ += s.critic_loss_exploit;
      acc_loss_explore_ += s.critic_loss_explore;
      acc_loss_dyn_ += s.dynamics_loss;
      acc_expl_reward_ += s.explore_reward_mean;
      ++acc_batches_;
    }
  }
}

void Trainer::adapt_noise_phase() {
  replay::RewardRecompute noop = [](const replay::Transition& tr, const Vec&) {
    return tr.reward;
  };
  for (Worker& w : workers_) {
    if (!w.learner.noise.param_noise_enabled || w.buffer.size() == 0) continue;
    replay::SampledBatch probe = w.buffer.sample_batch(
        std::min<int>(train_.batch_size, 256), 0.0, replay::HerMode::None, noop);
    w.learner.adapt_noise(w.policy, probe.items, w.noise_rng);
  }
}

void Trainer::run_cycle() {
  rollout_phase();
  merge_pending_stats();
  update_phase();
  adapt_noise_phase();
}

void Trainer::merge_pending_stats() {
  RunningStats obs = workers_[0].learner.obs_stats;
  RunningStats goal = workers_[0].learner.goal_stats;
  for (Worker& w : workers_) {
    obs.merge(w.learner.obs_pending);
    goal.merge(w.learner.goal_pending);
  }
  for (Worker& w : workers_) {
    w.learner.obs_stats = obs;
    w.learner.goal_stats = goal;
    w.learner.obs_pending = RunningStats(obs.dim, obs.std_floor);
    w.learner.goal_pending = RunningStats(goal.dim, goal.std_floor);
  }
}

void Trainer::average_parameters() {
  if (workers_.size() == 1) {
    merge_pending_stats();
    return;
  }

  // PopArt heads first: move every worker onto the mean (sigma, mu) with the
  // output-preserving top-layer rewrite, then average raw tensors.
  const size_t n_slots = workers_[0].learner.popart_slots().size();
  for (size_t s = 0; s < n_slots; ++s) {
    double mean_sigma = 0.0, mean_mu = 0.0;
    for (Worker& w : workers_) {
      auto slot = w.learner.popart_slots()[s];
      mean_sigma += slot.head->sigma;
      mean_mu += slot.head->mu;
    }
    mean_sigma /= workers_.size();
    mean_mu /= workers_.size();
    for (Worker& w : workers_) {
      auto slot = w.learner.popart_slots()[s];
      popart_rescale_to(*slot.head, *slot.critic, mean_sigma, mean_mu);
    }
  }

  std::vector<std::vector<Matrix*>> tensors(workers_.size());
  for (size_t wi = 0; wi < workers_.size(); ++wi)
    workers_[wi].learner.visit_tensors(
        [&](const std::string&, Matrix& m) { tensors[wi].push_back(&m); });
  const size_t n_tensors = tensors[0].size();
  for (size_t ti = 0; ti < n_tensors; ++ti) {
    Matrix& first = *tensors[0][ti];
    for (size_t wi = 1; wi < workers_.size(); ++wi)
      SRL_CHECK(tensors[wi][ti]->same_shape(first),
                "average_parameters: shape divergence across workers");
    Vec mean(first.data.size(), 0.0);
    for (size_t wi = 0; wi < workers_.size(); ++wi)
      for (size_t i = 0; i < mean.size(); ++i) mean[i] += tensors[wi][ti]->data[i];
    for (double& v : mean) v /= workers_.size();
    for (size_t wi = 0; wi < workers_.size(); ++wi) tensors[wi][ti]->data = mean;
  }

  merge_pending_stats();
}

EpochStats Trainer::window_stats() const {
  EpochStats stats;
  stats.epoch = epoch_;
  stats.env_steps = env_steps_;
  stats.test_env_steps = test_env_steps_;
  stats.stage = env_.stage;
  if (!window_.empty()) {
    double s = 0.0, r = 0.0;
    for (const auto& [success, reward] : window_) {
      s += success;
      r += reward;
    }
    stats.success_rate = s / window_.size();
    stats.mean_episode_reward = r / window_.size();
  }
  if (acc_batches_ > 0) {
    stats.critic_loss_exploit = acc_loss_exploit_ / acc_batches_;
    stats.critic_loss_explore = acc_loss_explore_ / acc_batches_;
    stats.dynamics_loss = acc_loss_dyn_ / acc_batches_;
    stats.explore_reward_mean = acc_expl_reward_ / acc_batches_;
  }
  return stats;
}

EpochStats Trainer::evaluate(const EvalPolicy& override_policy) {
  TestSummary summary = run_test_episodes(workers_[0].learner, env_,
                                          train_.test_episodes_per_epoch, eval_rng_,
                                          override_policy);
  for (size_t i = 0; i < summary.successes.size(); ++i) {
    window_.emplace_back(summary.successes[i], summary.episode_rewards[i]);
    while (static_cast<int>(window_.size()) > train_.window) window_.pop_front();
  }
  test_env_steps_ += static_cast<uint64_t>(train_.test_episodes_per_epoch) *
                     env_.horizon_or_default();
  return window_stats();
}

void Trainer::inject_test_results(const std::vector<std::pair<bool, double>>& results) {
  for (const auto& [success, reward] : results) {
    window_.emplace_back(success ? 1 : 0, reward);
    while (static_cast<int>(window_.size()) > train_.window) window_.pop_front();
  }
}

bool Trainer::maybe_advance_stage() {
  if (!curriculum_.enabled || env_.stage >= 3) return false;
  if (static_cast<int>(window_.size()) < train_.window) return false;
  const double threshold =
      env_.stage == 1 ? curriculum_.threshold_stage1 : curriculum_.threshold_stage2;
  if (window_stats().success_rate < threshold) return false;

  // Restart on the next stage: weights, PopArt heads and normalizer
  // statistics carry over; buffers, optimizer moments, noise scale and the
  // test window do not.
  env_.stage += 1;
  for (Worker& w : workers_) {
    w.buffer.clear();
    w.learner.reset_optimizers();
    w.learner.reset_noise();
  }
  window_.clear();
  if (!out_dir_.empty())
    save_checkpoint(out_dir_ + "/checkpoints/stage_" + std::to_string(env_.stage) + ".ckpt");
  return true;
}

EpochStats Trainer::run_epoch() {
  ++epoch_;
  acc_loss_exploit_ = acc_loss_explore_ = acc_loss_dyn_ = acc_expl_reward_ = 0.0;
  acc_batches_ = 0;
  for (int c = 0; c < train_.cycles_per_epoch; ++c) {
    run_cycle();
    if (train_.max_env_steps > 0 && env_steps_ >= train_.max_env_steps) break;
  }
  EpochStats stats = evaluate();
  write_csv_row(stats);
  if (!out_dir_.empty()) {
    save_checkpoint(out_dir_ + "/checkpoints/epoch_" + std::to_string(epoch_) + ".ckpt");
    save_checkpoint(out_dir_ + "/checkpoints/latest.ckpt");
  }
  maybe_advance_stage();
  return stats;
}

std::vector<EpochStats> Trainer::run() {
  std::vector<EpochStats> history;
  for (int e = 0; e < train_.epochs; ++e) {
    history.push_back(run_epoch());
    const EpochStats& s = history.back();
    if (train_.max_env_steps > 0 && s.env_steps >= train_.max_env_steps) break;
    if (train_.stop_success_threshold > 0.0 &&
        static_cast<int>(window_.size()) >= train_.window &&
        s.success_rate >= train_.stop_success_threshold)
      break;
  }
  return history;
}

void Trainer::write_csv_row(const EpochStats& s) {
  if (out_dir_.empty()) return;
  const std::string path = out_dir_ + "/metrics.csv";
  std::ofstream out(path, csv_started_ ? std::ios::app : std::ios::trunc);
  if (!csv_started_) {
    out << "epoch,env_steps,test_env_steps,stage,success_rate,mean_episode_reward,"
           "critic_loss_exploit,critic_loss_explore,dynamics_loss,explore_reward_mean\n";
    csv_started_ = true;
  }
  out << s.epoch << ',' << s.env_steps << ',' << s.test_env_steps << ',' << s.stage << ','
      << s.success_rate << ',' << s.mean_episode_reward << ',' << s.critic_loss_exploit
      << ',' << s.critic_loss_explore << ',' << s.dynamics_loss << ','
      << s.explore_reward_mean << '\n';
}

void Trainer::save_checkpoint(const std::string& path) const {
  workers_[0].learner.save_checkpoint(path);
}

}  // namespace stackrl::trainer
