#pragma once

#include <cstddef>
#include <vector>

#include "aacher/numeric.hpp"
#include "aacher/rng.hpp"

namespace aacher {

enum class OutputActivation { Linear, TanhScaled };

// Fully-connected network: per hidden layer affine -> layer norm -> ReLU,
// then a final affine, optionally squashed to output_scale * tanh.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  std::vector<Mat> weights;              // one per affine layer
  std::vector<Vec> biases;
  std::vector<Vec> ln_gain;              // one per hidden layer
  std::vector<Vec> ln_bias;
  OutputActivation output_activation = OutputActivation::Linear;
  double output_scale = 1.0;             // applies to TanhScaled only

  std::size_t num_affine() const { return weights.size(); }
  std::size_t num_hidden() const { return ln_gain.size(); }
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
};

// Gradient (or Adam moment) buffers shaped like the parameters of one net.
struct MlpGrads {
  std::vector<Mat> weights;
  std::vector<Vec> biases;
  std::vector<Vec> ln_gain;
  std::vector<Vec> ln_bias;

  void zero();
};

MlpGrads grads_like(const MlpParams& params);

struct AdamState {
  MlpGrads m;
  MlpGrads v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState adam_like(const MlpParams& params);

// Everything the backward pass needs from one forward evaluation.
struct ForwardCache {
  std::vector<Vec> acts;        // acts[0] = input, acts[i+1] = layer i output
  std::vector<Vec> xhat;        // normalized pre-activation per hidden layer
  std::vector<double> inv_std;  // 1/sqrt(var + eps) per hidden layer
  Vec tanh_out;                 // tanh(z) for the TanhScaled output layer
};

constexpr double kLayerNormEps = 1e-6;

// Normalize z to zero mean / unit variance over the layer, then gain/bias.
// xhat receives the pre-gain normalized values; returns 1/sqrt(var + eps).
double layer_norm(const Vec& z, const Vec& gain, const Vec& bias, Vec& xhat, Vec& out);

// Shape a network and draw initial parameters: hidden weights/biases uniform
// in +-1/sqrt(fan_in), the final layer of tanh nets uniform in +-3e-3,
// layer-norm gains 1 and biases 0.
MlpParams make_mlp(std::vector<std::size_t> layer_sizes, OutputActivation activation,
                   double output_scale, Rng& rng);

// Forward pass; the cache is reusable across calls. Returns a reference to the
// output activation owned by the cache.
const Vec& mlp_forward(const MlpParams& params, const Vec& input, ForwardCache& cache);

// Convenience overload when no backward pass follows.
Vec mlp_forward(const MlpParams& params, const Vec& input);

// Reverse-mode gradients of dot(output, upstream) w.r.t. every parameter,
// accumulated into `grads` (caller zeroes). Returns the input gradient.
Vec mlp_backward(const MlpParams& params, const ForwardCache& cache, const Vec& upstream,
                 MlpGrads& grads);

// Input gradient only; skips parameter-gradient accumulation.
Vec mlp_backward_input(const MlpParams& params, const ForwardCache& cache, const Vec& upstream);

// Bias-corrected Adam update, element-wise over all parameter arrays.
// Throws TrainingDivergence naming the offending affine layer when a gradient
// entry is non-finite.
void adam_step(MlpParams& params, AdamState& state, const MlpGrads& grads, double lr);

}  // namespace aacher
