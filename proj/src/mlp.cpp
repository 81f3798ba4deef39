#include "aacher/mlp.hpp"

#include <cmath>
#include <string>

namespace aacher {

void MlpGrads::zero() {
  for (auto& w : weights) w.data.assign(w.data.size(), 0.0);
  for (auto& b : biases) b.assign(b.size(), 0.0);
  for (auto& g : ln_gain) g.assign(g.size(), 0.0);
  for (auto& b : ln_bias) b.assign(b.size(), 0.0);
}

MlpGrads grads_like(const MlpParams& params) {
  MlpGrads g;
  for (const auto& w : params.weights) g.weights.emplace_back(w.rows, w.cols);
  for (const auto& b : params.biases) g.biases.emplace_back(b.size(), 0.0);
  for (const auto& v : params.ln_gain) g.ln_gain.emplace_back(v.size(), 0.0);
  for (const auto& v : params.ln_bias) g.ln_bias.emplace_back(v.size(), 0.0);
  return g;
}

AdamState adam_like(const MlpParams& params) {
  AdamState s;
  s.m = grads_like(params);
  s.v = grads_like(params);
  return s;
}

double layer_norm(const Vec& z, const Vec& gain, const Vec& bias, Vec& xhat, Vec& out) {
  const std::size_t n = z.size();
  if (gain.size() != n || bias.size() != n) {
    throw ContractViolation("layer_norm: shape mismatch");
  }
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : z) {
    const double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
  xhat.resize(n);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    xhat[i] = (z[i] - mean) * inv_std;
    out[i] = gain[i] * xhat[i] + bias[i];
  }
  return inv_std;
}

MlpParams make_mlp(std::vector<std::size_t> layer_sizes, OutputActivation activation,
                   double output_scale, Rng& rng) {
  if (layer_sizes.size() < 2) throw ContractViolation("make_mlp: need at least input and output");
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw ContractViolation("make_mlp: zero-width layer");
  }
  MlpParams p;
  p.layer_sizes = std::move(layer_sizes);
  p.output_activation = activation;
  p.output_scale = output_scale;
  const std::size_t n_affine = p.layer_sizes.size() - 1;
  for (std::size_t i = 0; i < n_affine; ++i) {
    const std::size_t fan_in = p.layer_sizes[i];
    const std::size_t fan_out = p.layer_sizes[i + 1];
    const bool final_tanh =
        (i + 1 == n_affine) && activation == OutputActivation::TanhScaled;
    const double scale = final_tanh ? 3e-3 : 1.0 / std::sqrt(static_cast<double>(fan_in));
    Mat w(fan_out, fan_in);
    for (double& v : w.data) v = rng.uniform(-scale, scale);
    Vec b(fan_out);
    for (double& v : b) v = rng.uniform(-scale, scale);
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
    if (i + 1 < n_affine) {
      p.ln_gain.emplace_back(fan_out, 1.0);
      p.ln_bias.emplace_back(fan_out, 0.0);
    }
  }
  return p;
}

const Vec& mlp_forward(const MlpParams& params, const Vec& input, ForwardCache& cache) {
  if (input.size() != params.input_dim()) {
    throw ContractViolation("mlp_forward: input width " + std::to_string(input.size()) +
                            " != " + std::to_string(params.input_dim()));
  }
  const std::size_t n_affine = params.num_affine();
  const std::size_t n_hidden = params.num_hidden();
  cache.acts.resize(n_affine + 1);
  cache.xhat.resize(n_hidden);
  cache.inv_std.resize(n_hidden);
  cache.acts[0] = input;

  Vec z;
  for (std::size_t i = 0; i < n_hidden; ++i) {
    affine(params.weights[i], params.biases[i], cache.acts[i], z);
    Vec& h = cache.acts[i + 1];
    cache.inv_std[i] = layer_norm(z, params.ln_gain[i], params.ln_bias[i], cache.xhat[i], h);
    for (double& v : h) v = v > 0.0 ? v : 0.0;
  }

  Vec& out = cache.acts[n_affine];
  affine(params.weights[n_affine - 1], params.biases[n_affine - 1], cache.acts[n_affine - 1], out);
  if (params.output_activation == OutputActivation::TanhScaled) {
    cache.tanh_out.resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      cache.tanh_out[j] = std::tanh(out[j]);
      out[j] = params.output_scale * cache.tanh_out[j];
    }
  }
  return out;
}

Vec mlp_forward(const MlpParams& params, const Vec& input) {
  ForwardCache cache;
  return mlp_forward(params, input, cache);
}

namespace {

// Shared spine of the two backward variants. When `grads` is null only the
// input gradient is produced.
Vec backward_impl(const MlpParams& params, const ForwardCache& cache, const Vec& upstream,
                  MlpGrads* grads) {
  const std::size_t n_affine = params.num_affine();
  const std::size_t n_hidden = params.num_hidden();
  if (cache.acts.size() != n_affine + 1) {
    throw ContractViolation("mlp_backward: cache does not match params");
  }
  if (upstream.size() != params.output_dim()) {
    throw ContractViolation("mlp_backward: upstream width mismatch");
  }

  // Output layer.
  Vec dz = upstream;
  if (params.output_activation == OutputActivation::TanhScaled) {
    for (std::size_t j = 0; j < dz.size(); ++j) {
      const double t = cache.tanh_out[j];
      dz[j] *= params.output_scale * (1.0 - t * t);
    }
  }
  if (grads != nullptr) {
    outer_accumulate(grads->weights[n_affine - 1], dz, cache.acts[n_affine - 1]);
    Vec& db = grads->biases[n_affine - 1];
    for (std::size_t j = 0; j < dz.size(); ++j) db[j] += dz[j];
  }
  Vec d;
  matvec_transposed(params.weights[n_affine - 1], dz, d);

  // Hidden layers, last to first: ReLU -> layer norm -> affine.
  Vec dxh;
  for (std::size_t ii = n_hidden; ii-- > 0;) {
    const Vec& h = cache.acts[ii + 1];
    const Vec& xh = cache.xhat[ii];
    const std::size_t n = h.size();
    dxh.resize(n);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double dy = h[j] > 0.0 ? d[j] : 0.0;
      if (grads != nullptr) {
        grads->ln_bias[ii][j] += dy;
        grads->ln_gain[ii][j] += dy * xh[j];
      }
      const double dx = dy * params.ln_gain[ii][j];
      dxh[j] = dx;
      m1 += dx;
      m2 += dx * xh[j];
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    const double inv_std = cache.inv_std[ii];
    dz.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      dz[j] = inv_std * (dxh[j] - m1 - xh[j] * m2);
    }
    if (grads != nullptr) {
      outer_accumulate(grads->weights[ii], dz, cache.acts[ii]);
      Vec& db = grads->biases[ii];
      for (std::size_t j = 0; j < n; ++j) db[j] += dz[j];
    }
    matvec_transposed(params.weights[ii], dz, d);
  }
  return d;
}

void adam_update_array(double* p, double* m, double* v, const double* g, std::size_t n,
                       const AdamState& s, double lr, double bc1, double bc2,
                       const char* kind, std::size_t layer) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g[i])) {
      throw TrainingDivergence("adam_step: non-finite gradient in " + std::string(kind) +
                                   " of layer " + std::to_string(layer),
                               layer);
    }
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace

Vec mlp_backward(const MlpParams& params, const ForwardCache& cache, const Vec& upstream,
                 MlpGrads& grads) {
  return backward_impl(params, cache, upstream, &grads);
}

Vec mlp_backward_input(const MlpParams& params, const ForwardCache& cache, const Vec& upstream) {
  return backward_impl(params, cache, upstream, nullptr);
}

void adam_step(MlpParams& params, AdamState& state, const MlpGrads& grads, double lr) {
  if (lr <= 0.0) throw ContractViolation("adam_step: lr must be positive");
  if (grads.weights.size() != params.weights.size()) {
    throw ContractViolation("adam_step: gradient shape mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    adam_update_array(params.weights[i].data.data(), state.m.weights[i].data.data(),
                      state.v.weights[i].data.data(), grads.weights[i].data.data(),
                      params.weights[i].size(), state, lr, bc1, bc2, "weights", i);
    adam_update_array(params.biases[i].data(), state.m.biases[i].data(),
                      state.v.biases[i].data(), grads.biases[i].data(),
                      params.biases[i].size(), state, lr, bc1, bc2, "biases", i);
  }
  for (std::size_t i = 0; i < params.ln_gain.size(); ++i) {
    adam_update_array(params.ln_gain[i].data(), state.m.ln_gain[i].data(),
                      state.v.ln_gain[i].data(), grads.ln_gain[i].data(),
                      params.ln_gain[i].size(), state, lr, bc1, bc2, "ln_gain", i);
    adam_update_array(params.ln_bias[i].data(), state.m.ln_bias[i].data(),
                      state.v.ln_bias[i].data(), grads.ln_bias[i].data(),
                      params.ln_bias[i].size(), state, lr, bc1, bc2, "ln_bias", i);
  }
}

}  // namespace aacher
