#include "stackrl/mlp.hpp"

#include <cmath>

namespace stackrl {

namespace {

void check_topology(const std::vector<int>& sizes) {
  SRL_CHECK(sizes.size() >= 2, "mlp needs at least input and output sizes");
  for (int s : sizes) SRL_CHECK(s > 0, "layer sizes must be positive");
}

}  // namespace

Mlp make_mlp(const std::vector<int>& layer_sizes, OutputActivation out_act,
             double preactivation_penalty_coeff, Rng& rng) {
  check_topology(layer_sizes);
  Mlp net;
  net.layer_sizes = layer_sizes;
  net.output_activation = out_act;
  net.preactivation_penalty_coeff = preactivation_penalty_coeff;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix w(fan_in, fan_out);
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(1, fan_out);
  }
  return net;
}

Mlp make_zero_mlp(const std::vector<int>& layer_sizes, OutputActivation out_act,
                  double preactivation_penalty_coeff) {
  check_topology(layer_sizes);
  Mlp net;
  net.layer_sizes = layer_sizes;
  net.output_activation = out_act;
  net.preactivation_penalty_coeff = preactivation_penalty_coeff;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    net.weights.emplace_back(layer_sizes[l], layer_sizes[l + 1]);
    net.biases.emplace_back(1, layer_sizes[l + 1]);
  }
  return net;
}

ForwardCache forward(const Mlp& net, const Matrix& input) {
  SRL_CHECK(input.cols == net.input_dim(), "forward: input dim mismatch");
  ForwardCache cache;
  cache.net = &net;
  cache.revision = net.revision;
  cache.input = input;
  const int n_layers = net.n_layers();
  cache.pre.reserve(n_layers);
  cache.post.reserve(n_layers);
  const Matrix* h = &cache.input;
  for (int l = 0; l < n_layers; ++l) {
    Matrix z = matmul(*h, net.weights[l]);
    add_row_broadcast(z, net.biases[l]);
    Matrix a = z;
    if (l + 1 < n_layers) {
      for (double& v : a.data) v = v > 0.0 ? v : 0.0;  // ReLU
    } else if (net.output_activation == OutputActivation::Tanh) {
      for (double& v : a.data) v = std::tanh(v);
    }
    cache.pre.push_back(std::move(z));
    cache.post.push_back(std::move(a));
    h = &cache.post.back();
  }
  return cache;
}

Vec forward_vec(const Mlp& net, const Vec& input) {
  ForwardCache cache = forward(net, from_row(input));
  return cache.output().data;
}

Gradients backward(const Mlp& net, const ForwardCache& cache,
                   const Matrix& output_gradient, bool want_params) {
  SRL_CHECK(cache.net == &net, "backward: cache belongs to a different net");
  SRL_CHECK(cache.revision == net.revision, "backward: cache is stale");
  const int n_layers = net.n_layers();
  SRL_CHECK(output_gradient.rows == cache.input.rows &&
                output_gradient.cols == net.output_dim(),
            "backward: output gradient shape mismatch");

  Gradients g;
  if (want_params) {
    g.weights.resize(n_layers);
    g.biases.resize(n_layers);
  }

  // Output layer: activation derivative plus the penalty term.
  Matrix dz = output_gradient;
  if (net.output_activation == OutputActivation::Tanh) {
    const Matrix& a = cache.post.back();
    for (size_t i = 0; i < dz.data.size(); ++i) dz.data[i] *= 1.0 - a.data[i] * a.data[i];
  }
  if (net.preactivation_penalty_coeff != 0.0) {
    const double scale = 2.0 * net.preactivation_penalty_coeff / cache.input.rows;
    axpy_inplace(dz, scale, cache.pre.back());
  }

  for (int l = n_layers - 1; l >= 0; --l) {
    const Matrix& h_prev = (l == 0) ? cache.input : cache.post[l - 1];
    if (want_params) {
      g.weights[l] = matmul_tn(h_prev, dz);
      g.biases[l] = column_sums(dz);
    }
    Matrix dh = matmul_nt(dz, net.weights[l]);
    if (l > 0) {
      const Matrix& z_prev = cache.pre[l - 1];
      for (size_t i = 0; i < dh.data.size(); ++i)
        if (z_prev.data[i] <= 0.0) dh.data[i] = 0.0;
      dz = std::move(dh);
    } else {
      g.input = std::move(dh);
    }
  }
  return g;
}

double preactivation_penalty(const Mlp& net, const ForwardCache& cache) {
  if (net.preactivation_penalty_coeff == 0.0) return 0.0;
  const Matrix& z = cache.pre.back();
  double acc = 0.0;
  for (double v : z.data) acc += v * v;
  return net.preactivation_penalty_coeff * acc / z.rows;
}

void accumulate(Gradients& dst, const Gradients& src) {
  SRL_CHECK(dst.weights.size() == src.weights.size(), "accumulate: layer count mismatch");
  for (size_t l = 0; l < dst.weights.size(); ++l) {
    add_inplace(dst.weights[l], src.weights[l]);
    add_inplace(dst.biases[l], src.biases[l]);
  }
}

}  // namespace stackrl
