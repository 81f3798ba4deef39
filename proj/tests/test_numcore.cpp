#include <doctest.h>

#include <cmath>
#include <vector>

#include "aacher/errors.hpp"
#include "aacher/mlp.hpp"
#include "aacher/rng.hpp"

using namespace aacher;

namespace {

// Straight-line reference forward pass, written independently of the library
// implementation.
Vec ref_forward(const MlpParams& p, const Vec& x) {
  Vec h = x;
  const std::size_t n_affine = p.weights.size();
  for (std::size_t i = 0; i + 1 < n_affine; ++i) {
    const Mat& w = p.weights[i];
    Vec z(w.rows, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      double acc = p.biases[i][r];
      for (std::size_t c = 0; c < w.cols; ++c) acc += w(r, c) * h[c];
      z[r] = acc;
    }
    double mu = 0.0;
    for (double v : z) mu += v;
    mu /= static_cast<double>(z.size());
    double var = 0.0;
    for (double v : z) var += (v - mu) * (v - mu);
    var /= static_cast<double>(z.size());
    const double denom = std::sqrt(var + 1e-6);
    Vec out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double y = p.ln_gain[i][j] * ((z[j] - mu) / denom) + p.ln_bias[i][j];
      out[j] = y > 0.0 ? y : 0.0;
    }
    h = std::move(out);
  }
  const Mat& w = p.weights[n_affine - 1];
  Vec out(w.rows, 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    double acc = p.biases[n_affine - 1][r];
    for (std::size_t c = 0; c < w.cols; ++c) acc += w(r, c) * h[c];
    out[r] = acc;
  }
  if (p.output_activation == OutputActivation::TanhScaled) {
    for (double& v : out) v = p.output_scale * std::tanh(v);
  }
  return out;
}

std::vector<std::pair<double*, std::size_t>> param_arrays(MlpParams& p) {
  std::vector<std::pair<double*, std::size_t>> out;
  for (auto& w : p.weights) out.emplace_back(w.data.data(), w.data.size());
  for (auto& b : p.biases) out.emplace_back(b.data(), b.size());
  for (auto& g : p.ln_gain) out.emplace_back(g.data(), g.size());
  for (auto& b : p.ln_bias) out.emplace_back(b.data(), b.size());
  return out;
}

std::vector<std::pair<const double*, std::size_t>> grad_arrays(const MlpGrads& g) {
  std::vector<std::pair<const double*, std::size_t>> out;
  for (auto& w : g.weights) out.emplace_back(w.data.data(), w.data.size());
  for (auto& b : g.biases) out.emplace_back(b.data(), b.size());
  for (auto& v : g.ln_gain) out.emplace_back(v.data(), v.size());
  for (auto& v : g.ln_bias) out.emplace_back(v.data(), v.size());
  return out;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Smallest |pre-ReLU activation| over all hidden units; finite differencing
// across a ReLU kink is meaningless, so test nets keep a margin around zero.
double kink_margin(const MlpParams& p, const ForwardCache& cache) {
  double margin = 1e300;
  for (std::size_t i = 0; i < p.ln_gain.size(); ++i) {
    for (std::size_t j = 0; j < p.ln_gain[i].size(); ++j) {
      const double y = p.ln_gain[i][j] * cache.xhat[i][j] + p.ln_bias[i][j];
      margin = std::min(margin, std::abs(y));
    }
  }
  return margin;
}

struct GradCheck {
  double max_rel = 0.0;
};

double rel_err(double a, double n) {
  const double denom = std::max({std::abs(a), std::abs(n), 1e-3});
  return std::abs(a - n) / denom;
}

// Central finite differences of dot(forward(.), upstream) against the
// analytic backward pass, over every parameter and the input.
GradCheck finite_difference_check(MlpParams& p, const Vec& input, const Vec& upstream) {
  const double h = 1e-5;
  ForwardCache cache;
  mlp_forward(p, input, cache);
  MlpGrads grads = grads_like(p);
  grads.zero();
  const Vec input_grad = mlp_backward(p, cache, upstream, grads);

  GradCheck res;
  const auto params = param_arrays(p);
  const auto analytic = grad_arrays(grads);
  ForwardCache scratch;
  for (std::size_t a = 0; a < params.size(); ++a) {
    for (std::size_t i = 0; i < params[a].second; ++i) {
      double& theta = params[a].first[i];
      const double saved = theta;
      theta = saved + h;
      const double fp = dot(mlp_forward(p, input, scratch), upstream);
      theta = saved - h;
      const double fm = dot(mlp_forward(p, input, scratch), upstream);
      theta = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      res.max_rel = std::max(res.max_rel, rel_err(analytic[a].first[i], numeric));
    }
  }
  Vec x = input;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = dot(mlp_forward(p, x, scratch), upstream);
    x[i] = saved - h;
    const double fm = dot(mlp_forward(p, x, scratch), upstream);
    x[i] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    res.max_rel = std::max(res.max_rel, rel_err(input_grad[i], numeric));
  }
  return res;
}

MlpParams random_net(Rng& rng, const std::vector<std::size_t>& sizes, OutputActivation act,
                     double scale) {
  MlpParams p = make_mlp(sizes, act, scale, rng);
  for (auto& g : p.ln_gain) {
    for (double& v : g) v = rng.uniform(0.5, 1.5);
  }
  for (auto& b : p.ln_bias) {
    for (double& v : b) v = rng.uniform(-0.5, 0.5);
  }
  return p;
}

Vec random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  Vec v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("forward: zero weights and biases give zero output") {
  Rng rng(1);
  MlpParams p = make_mlp({3, 5, 2}, OutputActivation::Linear, 1.0, rng);
  for (auto& w : p.weights) w.data.assign(w.data.size(), 0.0);
  for (auto& b : p.biases) b.assign(b.size(), 0.0);
  const Vec out = mlp_forward(p, {1.0, -2.0, 3.0});
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("forward: single affine layer computed by hand") {
  Rng rng(2);
  MlpParams p = make_mlp({1, 1}, OutputActivation::Linear, 1.0, rng);
  p.weights[0](0, 0) = 2.0;
  p.biases[0][0] = 1.0;
  const Vec out = mlp_forward(p, {3.0});
  CHECK(out.size() == 1);
  CHECK(out[0] == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("forward matches an independent reference pass") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto act = trial % 2 == 0 ? OutputActivation::Linear : OutputActivation::TanhScaled;
    MlpParams p = random_net(rng, {2, 16, 16, 1}, act, 1.5);
    const Vec x = random_vec(rng, 2, -2.0, 2.0);
    const Vec got = mlp_forward(p, x);
    const Vec want = ref_forward(p, x);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward: shape mismatch is a contract violation") {
  Rng rng(4);
  MlpParams p = make_mlp({3, 4, 2}, OutputActivation::Linear, 1.0, rng);
  CHECK_THROWS_AS(mlp_forward(p, {1.0, 2.0}), ContractViolation);
}

TEST_CASE("backward: zero upstream gives zero gradients") {
  Rng rng(5);
  MlpParams p = random_net(rng, {3, 8, 2}, OutputActivation::Linear, 1.0);
  ForwardCache cache;
  mlp_forward(p, {0.3, -0.7, 1.1}, cache);
  MlpGrads grads = grads_like(p);
  grads.zero();
  const Vec in_grad = mlp_backward(p, cache, {0.0, 0.0}, grads);
  for (double v : in_grad) CHECK(v == 0.0);
  for (const auto& [ptr, n] : grad_arrays(grads)) {
    for (std::size_t i = 0; i < n; ++i) CHECK(ptr[i] == 0.0);
  }
}

TEST_CASE("backward: 1-d linear net gradients by hand") {
  Rng rng(6);
  MlpParams p = make_mlp({1, 1}, OutputActivation::Linear, 1.0, rng);
  p.weights[0](0, 0) = 1.75;
  p.biases[0][0] = -0.25;
  const double x = 0.6;
  ForwardCache cache;
  mlp_forward(p, {x}, cache);
  MlpGrads grads = grads_like(p);
  grads.zero();
  const Vec in_grad = mlp_backward(p, cache, {1.0}, grads);
  CHECK(grads.weights[0](0, 0) == doctest::Approx(x).epsilon(1e-15));
  CHECK(grads.biases[0][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(in_grad[0] == doctest::Approx(1.75).epsilon(1e-15));
}

TEST_CASE("backward: finite differences on a 3-8-8-2 net") {
  Rng rng(7);
  for (;;) {
    MlpParams p = random_net(rng, {3, 8, 8, 2}, OutputActivation::TanhScaled, 1.0);
    const Vec x = random_vec(rng, 3, -2.0, 2.0);
    ForwardCache cache;
    mlp_forward(p, x, cache);
    if (kink_margin(p, cache) < 1e-3) continue;  // resample away from ReLU kinks
    const Vec upstream = random_vec(rng, 2, -1.0, 1.0);
    const GradCheck res = finite_difference_check(p, x, upstream);
    CHECK(res.max_rel < 1e-4);
    break;
  }
}

TEST_CASE("gradient check over many random small nets") {
  Rng rng(8);
  double worst = 0.0;
  int done = 0;
  while (done < 25) {
    std::vector<std::size_t> sizes{1 + rng.index(6)};
    const std::size_t hidden = 1 + rng.index(3);
    for (std::size_t i = 0; i < hidden; ++i) sizes.push_back(2 + rng.index(15));
    sizes.push_back(1 + rng.index(3));
    const auto act = rng.uniform() < 0.5 ? OutputActivation::Linear : OutputActivation::TanhScaled;
    MlpParams p = random_net(rng, sizes, act, 0.5 + rng.uniform());
    const Vec x = random_vec(rng, sizes.front(), -2.0, 2.0);
    ForwardCache cache;
    mlp_forward(p, x, cache);
    if (kink_margin(p, cache) < 1e-3) continue;
    const Vec upstream = random_vec(rng, sizes.back(), -1.0, 1.0);
    worst = std::max(worst, finite_difference_check(p, x, upstream).max_rel);
    ++done;
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("backward_input matches the full backward's input gradient bitwise") {
  Rng rng(9);
  MlpParams p = random_net(rng, {4, 12, 12, 3}, OutputActivation::TanhScaled, 2.0);
  const Vec x = random_vec(rng, 4, -1.0, 1.0);
  ForwardCache cache;
  mlp_forward(p, x, cache);
  const Vec upstream = random_vec(rng, 3, -1.0, 1.0);
  MlpGrads grads = grads_like(p);
  grads.zero();
  const Vec full = mlp_backward(p, cache, upstream, grads);
  const Vec input_only = mlp_backward_input(p, cache, upstream);
  REQUIRE(full.size() == input_only.size());
  for (std::size_t i = 0; i < full.size(); ++i) CHECK(full[i] == input_only[i]);
}

TEST_CASE("layer norm: normalized values have zero mean and unit variance") {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(31);
    Vec z = random_vec(rng, n, -50.0, 50.0);
    Vec gain(n, 1.0), bias(n, 0.0), xhat, out;
    layer_norm(z, gain, bias, xhat, out);
    double mean = 0.0;
    for (double v : xhat) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : xhat) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(var - 1.0) < 1e-8);
  }
}

TEST_CASE("forward/backward stay finite for bounded inputs and parameters") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    MlpParams p = make_mlp({4, 16, 16, 2}, OutputActivation::Linear, 1.0, rng);
    for (auto& [ptr, n] : param_arrays(p)) {
      for (std::size_t i = 0; i < n; ++i) ptr[i] = rng.uniform(-10.0, 10.0);
    }
    const Vec x = random_vec(rng, 4, -10.0, 10.0);
    ForwardCache cache;
    const Vec& out = mlp_forward(p, x, cache);
    for (double v : out) REQUIRE(std::isfinite(v));
    MlpGrads grads = grads_like(p);
    grads.zero();
    const Vec in_grad = mlp_backward(p, cache, random_vec(rng, 2, -10.0, 10.0), grads);
    for (double v : in_grad) REQUIRE(std::isfinite(v));
    for (const auto& [ptr, n] : grad_arrays(grads)) {
      for (std::size_t i = 0; i < n; ++i) REQUIRE(std::isfinite(ptr[i]));
    }
  }
}

TEST_CASE("adam: zero gradients are a fixed point") {
  Rng rng(12);
  MlpParams p = random_net(rng, {2, 6, 1}, OutputActivation::Linear, 1.0);
  const MlpParams before = p;
  AdamState state = adam_like(p);
  MlpGrads grads = grads_like(p);
  grads.zero();
  for (int i = 0; i < 5; ++i) adam_step(p, state, grads, 0.01);
  CHECK(state.t == 5);
  const auto now = param_arrays(p);
  MlpParams before_copy = before;
  const auto old = param_arrays(before_copy);
  for (std::size_t a = 0; a < now.size(); ++a) {
    for (std::size_t i = 0; i < now[a].second; ++i) CHECK(now[a].first[i] == old[a].first[i]);
  }
}

TEST_CASE("adam: first step moves a scalar by about -lr") {
  Rng rng(13);
  MlpParams p = make_mlp({1, 1}, OutputActivation::Linear, 1.0, rng);
  p.weights[0](0, 0) = 0.0;
  p.biases[0][0] = 0.0;
  AdamState state = adam_like(p);
  MlpGrads grads = grads_like(p);
  grads.zero();
  grads.weights[0](0, 0) = 1.0;
  adam_step(p, state, grads, 0.1);
  CHECK(state.t == 1);
  // Bias-corrected first step: mhat = 1, vhat = 1, so -lr / (1 + eps).
  const double expected = -0.1 / (1.0 + 1e-8);
  CHECK(p.weights[0](0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(p.weights[0](0, 0) == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adam: identical nets and gradients update identically") {
  Rng rng(14);
  MlpParams p1 = random_net(rng, {3, 8, 2}, OutputActivation::TanhScaled, 1.0);
  MlpParams p2 = p1;
  AdamState s1 = adam_like(p1);
  AdamState s2 = adam_like(p2);
  MlpGrads grads = grads_like(p1);
  grads.zero();
  for (auto& w : grads.weights) {
    for (double& v : w.data) v = rng.uniform(-1.0, 1.0);
  }
  adam_step(p1, s1, grads, 0.003);
  adam_step(p2, s2, grads, 0.003);
  const auto a1 = param_arrays(p1);
  const auto a2 = param_arrays(p2);
  for (std::size_t a = 0; a < a1.size(); ++a) {
    for (std::size_t i = 0; i < a1[a].second; ++i) CHECK(a1[a].first[i] == a2[a].first[i]);
  }
}

TEST_CASE("adam: non-finite gradient names the offending layer") {
  Rng rng(15);
  MlpParams p = make_mlp({2, 4, 1}, OutputActivation::Linear, 1.0, rng);
  AdamState state = adam_like(p);
  MlpGrads grads = grads_like(p);
  grads.zero();
  grads.weights[1](0, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    adam_step(p, state, grads, 0.01);
    FAIL("expected TrainingDivergence");
  } catch (const TrainingDivergence& e) {
    CHECK(e.layer_index == 1);
  }
}

TEST_CASE("rng: gaussian with zero stddev returns the mean") {
  Rng rng(16);
  CHECK(rng.gaussian(3.0, 0.0) == 3.0);
}

TEST_CASE("rng: fixed seed reproduces the stream") {
  Rng a(77);
  Rng b(77);
  for (int i = 0; i < 10; ++i) CHECK(a.gaussian(0.0, 1.0) == b.gaussian(0.0, 1.0));
}

TEST_CASE("rng: gaussian sample moments match N(0, 0.2)") {
  Rng rng(17);
  const std::size_t n = 1000000;
  const double std = std::sqrt(0.2);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.gaussian(0.0, std);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sumsq / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) < 0.005);
  CHECK(std::abs(var - 0.2) < 0.01);
}

TEST_CASE("rng: labeled sub-streams are independent of other consumers") {
  Rng root1(99);
  Rng root2(99);
  Rng env1 = root1.stream("env");
  // World 2 adds a new consumer before using the env stream.
  Rng extra = root2.stream("noise");
  (void)extra.next_u64();
  Rng env2 = root2.stream("env");
  for (int i = 0; i < 16; ++i) CHECK(env1.next_u64() == env2.next_u64());
  CHECK(root1.stream("env").next_u64() != root1.stream("noise").next_u64());
}

TEST_CASE("rng: index stays in range and covers all slots") {
  Rng rng(18);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t k = rng.index(10);
    REQUIRE(k < 10);
    ++counts[k];
  }
  for (int c : counts) CHECK(c > 0);
}
