#pragma once

#include <functional>

#include "stackrl/mlp.hpp"

namespace stackrl {

/// Scalar loss over a batch of network outputs, together with its gradient
/// w.r.t. those outputs. Must be deterministic.
struct LossEval {
  double value = 0.0;
  Matrix d_output;
};
using OutputLoss = std::function<LossEval(const Matrix& output)>;

/// Compares analytic parameter gradients against central finite differences
/// for loss(net(input)) + preactivation penalty. Returns the max over all
/// parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double gradient_check(const Mlp& net, const Matrix& input, const OutputLoss& loss,
                      double fd_step = 1e-5);

}  // namespace stackrl
