#include "stackrl/normalize.hpp"

#include <algorithm>
#include <cmath>

namespace stackrl {

void RunningStats::observe(std::span<const double> v) {
  SRL_CHECK(static_cast<int>(v.size()) == dim, "observe: dimension mismatch");
  count += 1.0;
  for (int i = 0; i < dim; ++i) {
    sum[i] += v[i];
    sum_sq[i] += v[i] * v[i];
  }
}

void RunningStats::observe_rows(const Matrix& rows) {
  SRL_CHECK(rows.cols == dim, "observe_rows: dimension mismatch");
  for (int r = 0; r < rows.rows; ++r)
    observe(std::span<const double>(rows.row(r), static_cast<size_t>(dim)));
}

void RunningStats::merge(const RunningStats& other) {
  SRL_CHECK(other.dim == dim, "merge: dimension mismatch");
  count += other.count;
  for (int i = 0; i < dim; ++i) {
    sum[i] += other.sum[i];
    sum_sq[i] += other.sum_sq[i];
  }
}

Vec RunningStats::mean() const {
  Vec m(dim, 0.0);
  if (count <= 0.0) return m;
  for (int i = 0; i < dim; ++i) m[i] = sum[i] / count;
  return m;
}

Vec RunningStats::stddev() const {
  Vec s(dim, std_floor);
  if (count <= 0.0) return s;
  for (int i = 0; i < dim; ++i) {
    const double m = sum[i] / count;
    const double var = std::max(sum_sq[i] / count - m * m, 0.0);
    s[i] = std::max(std::sqrt(var), std_floor);
  }
  return s;
}

Vec RunningStats::normalize_clip(std::span<const double> v, double clip) const {
  SRL_CHECK(!empty(), "normalize_clip: stats are empty");
  SRL_CHECK(static_cast<int>(v.size()) == dim, "normalize_clip: dimension mismatch");
  const Vec m = mean();
  const Vec s = stddev();
  Vec out(dim);
  for (int i = 0; i < dim; ++i)
    out[i] = std::clamp((v[i] - m[i]) / s[i], -clip, clip);
  return out;
}

void RunningStats::normalize_clip_rows(Matrix& rows, double clip) const {
  SRL_CHECK(!empty(), "normalize_clip_rows: stats are empty");
  SRL_CHECK(rows.cols == dim, "normalize_clip_rows: dimension mismatch");
  const Vec m = mean();
  const Vec s = stddev();
  for (int r = 0; r < rows.rows; ++r) {
    double* row = rows.row(r);
    for (int i = 0; i < dim; ++i)
      row[i] = std::clamp((row[i] - m[i]) / s[i], -clip, clip);
  }
}

namespace {

void rewrite_top_layer(Mlp& critic, double sigma_old, double mu_old,
                       double sigma_new, double mu_new) {
  Matrix& w = critic.weights.back();
  Matrix& b = critic.biases.back();
  const double ratio = sigma_old / sigma_new;
  for (double& v : w.data) v *= ratio;
  for (double& v : b.data) v = (sigma_old * v + mu_old - mu_new) / sigma_new;
  critic.bump();
}

}  // namespace

void popart_update(PopArtHead& head, Mlp& critic, std::span<const double> targets) {
  SRL_CHECK(!targets.empty(), "popart_update: empty target batch");
  SRL_CHECK(critic.output_dim() == 1, "popart_update: critic must have scalar output");

  double m1 = 0.0, m2 = 0.0;
  for (double y : targets) {
    m1 += y;
    m2 += y * y;
  }
  m1 /= static_cast<double>(targets.size());
  m2 /= static_cast<double>(targets.size());

  const double mu_old = head.mu;
  const double sigma_old = head.sigma;
  const double beta = head.step_size;
  head.mu = (1.0 - beta) * head.mu + beta * m1;
  head.second_moment = (1.0 - beta) * head.second_moment + beta * m2;
  const double var = head.second_moment - head.mu * head.mu;
  head.sigma = std::max(std::sqrt(std::max(var, 0.0)), head.sigma_floor);

  if (head.sigma != sigma_old || head.mu != mu_old)
    rewrite_top_layer(critic, sigma_old, mu_old, head.sigma, head.mu);
}

void popart_rescale_to(PopArtHead& head, Mlp& critic, double new_sigma, double new_mu) {
  SRL_CHECK(new_sigma > 0.0, "popart_rescale_to: sigma must be positive");
  if (new_sigma == head.sigma && new_mu == head.mu) return;
  rewrite_top_layer(critic, head.sigma, head.mu, new_sigma, new_mu);
  head.sigma = new_sigma;
  head.mu = new_mu;
  head.second_moment = new_sigma * new_sigma + new_mu * new_mu;
}

}  // namespace stackrl
