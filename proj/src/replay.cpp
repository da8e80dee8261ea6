#include "stackrl/replay.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace stackrl::replay {

void ReplayBuffer::store_episode(Episode episode) {
  SRL_CHECK(!episode.steps.empty(), "store_episode: empty episode");
  SRL_CHECK(episode.steps.size() <= capacity_, "store_episode: episode exceeds capacity");
  for (size_t i = 0; i < episode.steps.size(); ++i) {
    SRL_CHECK(episode.steps[i].t == static_cast<int>(i),
              "store_episode: timesteps must be contiguous from 0");
    SRL_CHECK(static_cast<int>(episode.steps[i].goal.size()) == layout_.goal_dim(),
              "store_episode: goal dim mismatch");
    SRL_CHECK(static_cast<int>(episode.steps[i].achieved_next.size()) == layout_.goal_dim(),
              "store_episode: achieved dim mismatch");
  }
  total_transitions_ += episode.steps.size();
  episodes_.push_back(std::move(episode));
  while (total_transitions_ > capacity_) {
    total_transitions_ -= episodes_.front().steps.size();
    episodes_.pop_front();
  }
  rebuild_cumulative();
}

void ReplayBuffer::rebuild_cumulative() {
  cumulative_.resize(episodes_.size());
  size_t acc = 0;
  for (size_t i = 0; i < episodes_.size(); ++i) {
    acc += episodes_[i].steps.size();
    cumulative_[i] = acc;
  }
}

void ReplayBuffer::clear() {
  episodes_.clear();
  cumulative_.clear();
  total_transitions_ = 0;
}

SampledBatch ReplayBuffer::sample_batch(int batch_size, double z, HerMode mode,
                                        const RewardRecompute& reward_fn) {
  SRL_CHECK(batch_size > 0, "sample_batch: batch_size must be positive");
  SRL_CHECK(total_transitions_ > 0, "sample_batch: buffer is empty");
  SRL_CHECK(z >= 0.0 && z <= 1.0, "sample_batch: z must be a probability");

  const int dim = layout_.criterion_dim;
  SampledBatch batch;
  batch.items.reserve(batch_size);
  batch.meta.reserve(batch_size);

  for (int b = 0; b < batch_size; ++b) {
    const size_t flat = static_cast<size_t>(
        rng_.uniform_int(0, static_cast<int64_t>(total_transitions_) - 1));
    const size_t ep_idx =
        std::upper_bound(cumulative_.begin(), cumulative_.end(), flat) - cumulative_.begin();
    const Episode& ep = episodes_[ep_idx];
    const size_t offset = ep_idx == 0 ? 0 : cumulative_[ep_idx - 1];
    const int t = static_cast<int>(flat - offset);
    const int len = static_cast<int>(ep.steps.size());

    Transition item = ep.steps[t];
    SampleMeta meta;
    meta.replaced.assign(layout_.n_criteria, 0);
    meta.source_t.assign(layout_.n_criteria, -1);
    meta.episode_index = static_cast<int>(ep_idx);
    meta.t = t;

    // Final-timestep transitions have no later timestep to borrow from and
    // pass through unaugmented.
    const bool augmentable = mode != HerMode::None && t + 1 < len;
    if (augmentable) {
      bool any_replaced = false;
      if (mode == HerMode::Standard) {
        if (rng_.uniform() < z) {
          const int future = static_cast<int>(rng_.uniform_int(t + 1, len - 1));
          item.goal = ep.steps[future].achieved_next;
          for (int c = 0; c < layout_.n_criteria; ++c) {
            meta.replaced[c] = 1;
            meta.source_t[c] = future;
          }
          any_replaced = true;
        }
      } else {
        for (int c = 0; c < layout_.n_criteria; ++c) {
          if (rng_.uniform() >= z) continue;
          const int future = static_cast<int>(rng_.uniform_int(t + 1, len - 1));
          const Vec& src = ep.steps[future].achieved_next;
          std::copy(src.begin() + static_cast<size_t>(c) * dim,
                    src.begin() + static_cast<size_t>(c + 1) * dim,
                    item.goal.begin() + static_cast<size_t>(c) * dim);
          meta.replaced[c] = 1;
          meta.source_t[c] = future;
          any_replaced = true;
        }
      }
      if (any_replaced) item.reward = her_reward_recompute(item, item.goal, reward_fn);
    }
    batch.items.push_back(std::move(item));
    batch.meta.push_back(std::move(meta));
  }
  return batch;
}

double her_reward_recompute(const Transition& transition, const Vec& new_goal,
                            const RewardRecompute& reward_fn) {
  SRL_CHECK(new_goal.size() == transition.goal.size(),
            "her_reward_recompute: goal dim mismatch");
  return reward_fn(transition, new_goal);
}

void ReplayBuffer::dump_jsonl(const std::string& path) const {
  std::ofstream out(path);
  SRL_CHECK(out.good(), "cannot open for writing: " + path);
  for (size_t e = 0; e < episodes_.size(); ++e) {
    for (const Transition& tr : episodes_[e].steps) {
      nlohmann::json row{{"episode", e},       {"t", tr.t},
                         {"obs", tr.obs},      {"goal", tr.goal},
                         {"action", tr.action}, {"reward", tr.reward},
                         {"next_obs", tr.next_obs}, {"achieved_next", tr.achieved_next}};
      out << row.dump() << "\n";
    }
  }
}

}  // namespace stackrl::replay
