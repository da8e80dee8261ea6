#pragma once

#include "stackrl/mat.hpp"

namespace stackrl {

enum class OutputActivation { Identity, Tanh };

/// Fully connected network with ReLU hidden layers and explicit parameter
/// storage. Forward passes are read-only; all mutation goes through
/// adam_step, soft_update, or direct parameter rewrites, each of which bumps
/// `revision` so stale activation caches can be rejected.
struct Mlp {
  std::vector<int> layer_sizes;  // [input, hidden..., output]
  std::vector<Matrix> weights;   // weights[l] is layer_sizes[l] x layer_sizes[l+1]
  std::vector<Matrix> biases;    // 1 x layer_sizes[l+1]
  OutputActivation output_activation = OutputActivation::Identity;
  // Penalty coeff * batch-mean of squared output-layer preactivations is
  // treated as an additive loss term; backward() injects its gradient.
  double preactivation_penalty_coeff = 0.0;
  uint64_t revision = 0;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int n_layers() const { return static_cast<int>(weights.size()); }
  void bump() { ++revision; }
};

Mlp make_mlp(const std::vector<int>& layer_sizes, OutputActivation out_act,
             double preactivation_penalty_coeff, Rng& rng);
Mlp make_zero_mlp(const std::vector<int>& layer_sizes, OutputActivation out_act,
                  double preactivation_penalty_coeff = 0.0);

/// Activation record from one forward pass; consumed by backward().
struct ForwardCache {
  const Mlp* net = nullptr;
  uint64_t revision = 0;
  Matrix input;                  // N x in
  std::vector<Matrix> pre;       // preactivations per layer, N x out_l
  std::vector<Matrix> post;      // activations per layer, N x out_l
  const Matrix& output() const { return post.back(); }
};

/// Batched forward pass; rows of `input` are samples.
ForwardCache forward(const Mlp& net, const Matrix& input);
Vec forward_vec(const Mlp& net, const Vec& input);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;
  Matrix input;  // gradient w.r.t. the forward input, N x in
};

/// Backpropagates `output_gradient` (dLoss/dOutput, N x out) through the
/// cached pass. Adds the preactivation penalty gradient when the coefficient
/// is nonzero. Set want_params = false to compute only the input gradient.
Gradients backward(const Mlp& net, const ForwardCache& cache,
                   const Matrix& output_gradient, bool want_params = true);

/// Loss value of the preactivation penalty term for a cached pass:
/// coeff * mean over batch rows of sum of squared output preactivations.
double preactivation_penalty(const Mlp& net, const ForwardCache& cache);

void accumulate(Gradients& dst, const Gradients& src);

}  // namespace stackrl
