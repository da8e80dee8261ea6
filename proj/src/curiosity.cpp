#include "stackrl/curiosity.hpp"

namespace stackrl::curiosity {

DynamicsModel DynamicsModel::make(int obs_dim, int action_dim,
                                  const std::vector<int>& hidden, double lr, Rng& rng) {
  std::vector<int> sizes;
  sizes.push_back(obs_dim + action_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(obs_dim);
  DynamicsModel model;
  model.net = make_mlp(sizes, OutputActivation::Identity, 0.0, rng);
  model.opt = AdamState::for_net(model.net, lr);
  return model;
}

Vec predict_next(const DynamicsModel& model, const Vec& obs_norm, const Vec& action) {
  SRL_CHECK(static_cast<int>(obs_norm.size() + action.size()) == model.net.input_dim(),
            "predict_next: dimension mismatch");
  Vec input = obs_norm;
  input.insert(input.end(), action.begin(), action.end());
  return forward_vec(model.net, input);
}

ScoreResult train_and_score(DynamicsModel& model, const Matrix& inputs,
                            const Matrix& targets) {
  SRL_CHECK(inputs.rows > 0, "train_and_score: empty batch");
  SRL_CHECK(targets.rows == inputs.rows && targets.cols == model.net.output_dim(),
            "train_and_score: target shape mismatch");

  ForwardCache cache = forward(model.net, inputs);
  const Matrix& pred = cache.output();
  const int n = inputs.rows;

  ScoreResult result;
  result.rewards.assign(n, 0.0);
  Matrix d_out(pred.rows, pred.cols);
  for (int i = 0; i < n; ++i) {
    const double* p = pred.row(i);
    const double* y = targets.row(i);
    double* d = d_out.row(i);
    double err = 0.0;
    for (int j = 0; j < pred.cols; ++j) {
      const double diff = p[j] - y[j];
      err += diff * diff;
      d[j] = 2.0 * diff / n;
    }
    result.rewards[i] = err;
    result.loss += err;
  }
  result.loss /= n;

  Gradients grads = backward(model.net, cache, d_out);
  adam_step(model.net, grads, model.opt);
  return result;
}

ScoreResult train_and_score(DynamicsModel& model,
                            const std::vector<replay::Transition>& batch,
                            const RunningStats& obs_stats, double input_clip) {
  SRL_CHECK(!batch.empty(), "train_and_score: empty batch");
  const int obs_dim = obs_stats.dim;
  const int action_dim = static_cast<int>(batch.front().action.size());
  Matrix inputs(static_cast<int>(batch.size()), obs_dim + action_dim);
  Matrix targets(static_cast<int>(batch.size()), obs_dim);
  for (size_t i = 0; i < batch.size(); ++i) {
    const Vec obs_n = obs_stats.normalize_clip(batch[i].obs, input_clip);
    const Vec next_n = obs_stats.normalize_clip(batch[i].next_obs, input_clip);
    double* in = inputs.row(static_cast<int>(i));
    std::copy(obs_n.begin(), obs_n.end(), in);
    std::copy(batch[i].action.begin(), batch[i].action.end(), in + obs_dim);
    std::copy(next_n.begin(), next_n.end(), targets.row(static_cast<int>(i)));
  }
  return train_and_score(model, inputs, targets);
}

}  // namespace stackrl::curiosity
