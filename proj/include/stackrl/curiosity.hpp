#pragma once

#include "stackrl/adam.hpp"
#include "stackrl/normalize.hpp"
#include "stackrl/replay.hpp"

namespace stackrl::curiosity {

/// Forward dynamics model: (normalized obs, action) -> normalized next obs.
/// Its per-sample squared prediction error is the exploration reward.
struct DynamicsModel {
  Mlp net;
  AdamState opt;

  static DynamicsModel make(int obs_dim, int action_dim,
                            const std::vector<int>& hidden, double lr, Rng& rng);
};

Vec predict_next(const DynamicsModel& model, const Vec& obs_norm, const Vec& action);

struct ScoreResult {
  Vec rewards;        // per-sample squared error, summed over components
  double loss = 0.0;  // mean of rewards; the quantity the update step descends
};

/// Scores the batch with the pre-update model, then takes one Adam step on
/// the mean error. Rows of `inputs` are (normalized obs, action); rows of
/// `targets` are normalized next observations.
ScoreResult train_and_score(DynamicsModel& model, const Matrix& inputs,
                            const Matrix& targets);

/// Convenience wrapper over transitions, applying the shared input
/// normalization statistics.
ScoreResult train_and_score(DynamicsModel& model,
                            const std::vector<replay::Transition>& batch,
                            const RunningStats& obs_stats, double input_clip = 5.0);

}  // namespace stackrl::curiosity
