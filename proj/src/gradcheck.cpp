#include "stackrl/gradcheck.hpp"

#include <cmath>

namespace stackrl {

namespace {

double loss_at(const Mlp& net, const Matrix& input, const OutputLoss& loss) {
  ForwardCache cache = forward(net, input);
  return loss(cache.output()).value + preactivation_penalty(net, cache);
}

double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

}  // namespace

double gradient_check(const Mlp& net, const Matrix& input, const OutputLoss& loss,
                      double fd_step) {
  ForwardCache cache = forward(net, input);
  LossEval eval = loss(cache.output());
  Gradients analytic = backward(net, cache, eval.d_output);

  Mlp probe = net;  // perturbed copy; analytic grads stay tied to `net`
  double worst = 0.0;
  auto check_tensor = [&](Matrix& p, const Matrix& a) {
    for (size_t i = 0; i < p.data.size(); ++i) {
      const double saved = p.data[i];
      p.data[i] = saved + fd_step;
      probe.bump();
      const double up = loss_at(probe, input, loss);
      p.data[i] = saved - fd_step;
      probe.bump();
      const double down = loss_at(probe, input, loss);
      p.data[i] = saved;
      probe.bump();
      const double numeric = (up - down) / (2.0 * fd_step);
      worst = std::max(worst, rel_err(a.data[i], numeric));
    }
  };
  for (int l = 0; l < probe.n_layers(); ++l) {
    check_tensor(probe.weights[l], analytic.weights[l]);
    check_tensor(probe.biases[l], analytic.biases[l]);
  }
  return worst;
}

}  // namespace stackrl
