#pragma once

#include "stackrl/mlp.hpp"

namespace stackrl {

/// Adam with bias correction. The L2 coefficient adds l2 * param to the raw
/// gradient before the moment updates.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double l2 = 0.0;
  int64_t step = 0;
  std::vector<Matrix> m_w, v_w, m_b, v_b;

  static AdamState for_net(const Mlp& net, double lr, double l2 = 0.0);
  void reset();
};

void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

/// Single-tensor update used by the network-level version.
void adam_step_tensor(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                      int64_t step, double lr, double beta1, double beta2,
                      double eps, double l2);

}  // namespace stackrl
