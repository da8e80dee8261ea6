#pragma once

#include <deque>
#include <functional>

#include "stackrl/common.hpp"

namespace stackrl::replay {

/// Goal vectors are flat; a goal is n_criteria blocks of criterion_dim each.
struct GoalLayout {
  int n_criteria = 1;
  int criterion_dim = 3;
  int goal_dim() const { return n_criteria * criterion_dim; }
};

struct Transition {
  Vec obs;
  Vec goal;           // flat goal active when the step was taken
  Vec action;
  double reward = 0.0;  // reward_fn(next_state, goal) at storage time
  Vec next_obs;
  Vec achieved_next;  // block positions after the step, flat
  int t = 0;
};

struct Episode {
  std::vector<Transition> steps;
};

enum class HerMode { None, Standard, MultiCriteria };

/// Recomputes the reward of a stored transition under a replacement goal.
/// Must never read the stored reward.
using RewardRecompute = std::function<double(const Transition&, const Vec& new_goal)>;

struct SampleMeta {
  std::vector<uint8_t> replaced;  // per criterion
  std::vector<int> source_t;      // timestep the replacement came from, -1 if none
  int episode_index = 0;          // index into the buffer's episode deque
  int t = 0;
};

struct SampledBatch {
  std::vector<Transition> items;  // goals/rewards already rewritten
  std::vector<SampleMeta> meta;
};

/// Episode-structured FIFO buffer. Stored transitions are immutable; all
/// hindsight augmentation happens at sampling time.
class ReplayBuffer {
 public:
  ReplayBuffer(size_t capacity, GoalLayout layout, Rng rng)
      : capacity_(capacity), layout_(layout), rng_(rng) {}

  void store_episode(Episode episode);
  SampledBatch sample_batch(int batch_size, double z, HerMode mode,
                            const RewardRecompute& reward_fn);

  size_t size() const { return total_transitions_; }
  size_t n_episodes() const { return episodes_.size(); }
  const Episode& episode(int i) const { return episodes_[i]; }
  const GoalLayout& layout() const { return layout_; }
  void clear();
  Rng& rng() { return rng_; }

  /// Debug dump, one JSON object per stored transition.
  void dump_jsonl(const std::string& path) const;

 private:
  size_t capacity_;
  GoalLayout layout_;
  Rng rng_;
  std::deque<Episode> episodes_;
  std::vector<size_t> cumulative_;  // prefix sums of episode lengths
  size_t total_transitions_ = 0;

  void rebuild_cumulative();
};

double her_reward_recompute(const Transition& transition, const Vec& new_goal,
                            const RewardRecompute& reward_fn);

}  // namespace stackrl::replay
