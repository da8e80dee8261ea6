#pragma once

#include <span>

#include "stackrl/mlp.hpp"

namespace stackrl {

/// Streaming mean/std over vectors. Merging two instances sums the raw
/// accumulators, so merged statistics equal those of the concatenated data.
struct RunningStats {
  int dim = 0;
  double count = 0.0;
  Vec sum;
  Vec sum_sq;
  double std_floor = 1e-2;

  explicit RunningStats(int dimension = 0, double floor = 1e-2)
      : dim(dimension), sum(dimension, 0.0), sum_sq(dimension, 0.0), std_floor(floor) {}

  void observe(std::span<const double> v);
  void observe_rows(const Matrix& rows);
  void merge(const RunningStats& other);
  bool empty() const { return count <= 0.0; }

  Vec mean() const;
  Vec stddev() const;  // floored at std_floor

  /// (v - mean) / std, clamped to [-clip, clip].
  Vec normalize_clip(std::span<const double> v, double clip = 5.0) const;
  void normalize_clip_rows(Matrix& rows, double clip = 5.0) const;
};

/// Adaptive normalization of a critic's scalar targets. The critic's output
/// head stays on a normalized scale; denormalized predictions are
/// sigma * n(x) + mu. Statistics updates rewrite the critic's top layer so
/// denormalized outputs are preserved for every input.
struct PopArtHead {
  double mu = 0.0;
  double sigma = 1.0;
  double second_moment = 1.0;  // tracks mean of y^2; sigma derives from it
  double step_size = 1e-3;
  double sigma_floor = 1e-4;

  double denormalize(double normalized) const { return sigma * normalized + mu; }
  double normalize_target(double y) const { return (y - mu) / sigma; }
};

/// One exponential-moving-average step on (mu, sigma) from a batch of
/// targets, followed by the top-layer rewrite of `critic`:
///   W <- W * sigma_old / sigma_new
///   b <- (sigma_old * b + mu_old - mu_new) / sigma_new
void popart_update(PopArtHead& head, Mlp& critic, std::span<const double> targets);

/// Rewrites the critic top layer so `head` can be replaced by (new_sigma,
/// new_mu) without changing denormalized outputs. Used at the cross-worker
/// averaging barrier.
void popart_rescale_to(PopArtHead& head, Mlp& critic, double new_sigma, double new_mu);

}  // namespace stackrl
