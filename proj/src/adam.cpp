#include "stackrl/adam.hpp"

#include <cmath>

namespace stackrl {

AdamState AdamState::for_net(const Mlp& net, double lr, double l2) {
  AdamState s;
  s.lr = lr;
  s.l2 = l2;
  for (int l = 0; l < net.n_layers(); ++l) {
    s.m_w.emplace_back(net.weights[l].rows, net.weights[l].cols);
    s.v_w.emplace_back(net.weights[l].rows, net.weights[l].cols);
    s.m_b.emplace_back(1, net.biases[l].cols);
    s.v_b.emplace_back(1, net.biases[l].cols);
  }
  return s;
}

void AdamState::reset() {
  step = 0;
  for (auto* group : {&m_w, &v_w, &m_b, &v_b})
    for (Matrix& m : *group) m.fill(0.0);
}

void adam_step_tensor(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                      int64_t step, double lr, double beta1, double beta2,
                      double eps, double l2) {
  SRL_CHECK(param.same_shape(grad) && param.same_shape(m) && param.same_shape(v),
            "adam_step: shape mismatch");
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (size_t i = 0; i < param.data.size(); ++i) {
    const double g = grad.data[i] + l2 * param.data[i];
    m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g;
    v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g * g;
    const double m_hat = m.data[i] / bc1;
    const double v_hat = v.data[i] / bc2;
    param.data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  SRL_CHECK(grads.weights.size() == static_cast<size_t>(net.n_layers()),
            "adam_step: gradient layer count mismatch");
  state.step += 1;
  for (int l = 0; l < net.n_layers(); ++l) {
    adam_step_tensor(net.weights[l], grads.weights[l], state.m_w[l], state.v_w[l],
                     state.step, state.lr, state.beta1, state.beta2, state.eps, state.l2);
    adam_step_tensor(net.biases[l], grads.biases[l], state.m_b[l], state.v_b[l],
                     state.step, state.lr, state.beta1, state.beta2, state.eps, state.l2);
  }
  net.bump();
}

}  // namespace stackrl
