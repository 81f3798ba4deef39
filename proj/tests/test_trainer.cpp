#include <doctest.h>

#include <cmath>

#include "aacher/errors.hpp"
#include "aacher/trainer.hpp"

using namespace aacher;

namespace {

// Small, fast configuration for schedule and determinism tests.
TrainConfig tiny_config(const std::string& env = "point_reach") {
  TrainConfig c;
  c.adcp = {1, 1};
  c.env_name = env;
  c.hidden_sizes = {8, 8};
  c.batch_size = 32;
  c.opt_steps_per_cycle = 2;
  c.cycles_per_epoch = 2;
  c.epochs = 1;
  c.eval_episodes = 2;
  c.seed = 5;
  return c;
}

bool params_equal(const MlpParams& a, const MlpParams& b) {
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (a.weights[i].data != b.weights[i].data) return false;
    if (a.biases[i] != b.biases[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("normalizer: identity before the first update, then running stats") {
  RunningStat stat(2);
  Vec out;
  stat.normalize({1.5, -2.0}, 5.0, out);
  CHECK(out[0] == 1.5);
  CHECK(out[1] == -2.0);

  for (int i = 0; i < 1000; ++i) stat.update({3.0, -1.0});
  CHECK(stat.mean(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(stat.mean(1) == doctest::Approx(-1.0).epsilon(1e-12));
  stat.normalize({3.0, -1.0}, 5.0, out);
  CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("normalizer: outputs are clipped to the configured range") {
  RunningStat stat(1);
  for (int i = 0; i < 100; ++i) stat.update({0.001 * i});
  Vec out;
  stat.normalize({1e6}, 5.0, out);
  CHECK(out[0] == 5.0);
  stat.normalize({-1e6}, 5.0, out);
  CHECK(out[0] == -5.0);
}

TEST_CASE("explore_action: zero noise is the deterministic averaged policy") {
  TrainConfig c = tiny_config();
  Trainer trainer(c);
  auto env = make_env(c.env_name);
  Rng env_rng(1);
  const GoalObservation obs = env->reset(env_rng);
  Rng noise(2);
  const Vec a = explore_action(trainer.ensemble(), trainer.normalizer(), obs, 0.0, noise);
  const Vec expected =
      actor_avg(trainer.ensemble(), trainer.normalizer().normalized_sg(obs), false);
  CHECK(a == expected);
}

TEST_CASE("explore_action: always within the action bounds") {
  TrainConfig c = tiny_config();
  Trainer trainer(c);
  auto env = make_env(c.env_name);
  Rng env_rng(3);
  const GoalObservation obs = env->reset(env_rng);
  Rng noise(4);
  for (int i = 0; i < 300; ++i) {
    const Vec a = explore_action(trainer.ensemble(), trainer.normalizer(), obs, 2.0, noise);
    for (double v : a) {
      CHECK(v <= 1.0);
      CHECK(v >= -1.0);
    }
  }
}

TEST_CASE("explore_action: noise variance matches the clipped-gaussian oracle") {
  // Zeroed actor output, max_action 1: the action is clip(noise, -1, 1).
  TrainConfig c = tiny_config();
  Trainer trainer(c);
  Ensemble ens = trainer.ensemble();
  for (ActorNet& a : ens.actors) {
    for (Mat& w : a.params.weights) w.data.assign(w.data.size(), 0.0);
    for (Vec& b : a.params.biases) b.assign(b.size(), 0.0);
  }
  auto env = make_env(c.env_name);
  Rng env_rng(5);
  const GoalObservation obs = env->reset(env_rng);
  Rng noise(6);
  const double sigma = std::sqrt(0.2);
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec a = explore_action(ens, trainer.normalizer(), obs, sigma, noise);
    for (double v : a) {
      sum += v;
      sumsq += v * v;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sumsq / static_cast<double>(n) - mean * mean;
  // Analytic variance of a N(0, 0.2) draw clipped to [-1, 1].
  const double u = 1.0 / sigma;
  const auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  const auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double inside = sigma * sigma * ((2.0 * Phi(u) - 1.0) - 2.0 * u * phi(u));
  const double expected = inside + 2.0 * (1.0 - Phi(u));
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("critic_l2: zero coefficient, single-weight arithmetic, permutation invariance") {
  Rng rng(7);
  Ensemble ens = make_ensemble(AdcpSpec{1, 2}, 4, 2, 1.0, {4}, rng);
  CHECK(critic_l2(ens, 0.0) == 0.0);

  // Collapse every critic weight, then set exactly one to 2.0.
  for (CriticNet& c : ens.critics) {
    for (Mat& w : c.params.weights) w.data.assign(w.data.size(), 0.0);
  }
  ens.critics[0].params.weights[0](0, 0) = 2.0;
  CHECK(critic_l2(ens, 0.5) == doctest::Approx(2.0).epsilon(1e-15));

  std::swap(ens.critics[0], ens.critics[1]);
  CHECK(critic_l2(ens, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("run_cycle: buffer grows by rollout_steps*(k+1) and counters advance") {
  TrainConfig c = tiny_config();
  c.her_k = 4;
  Trainer trainer(c);
  trainer.run_cycle();
  CHECK(trainer.buffer().size() == 100 * 5);
  CHECK(trainer.env_steps() == 100);
  CHECK(trainer.opt_steps() == c.opt_steps_per_cycle);
  trainer.run_cycle();
  CHECK(trainer.buffer().size() == 2 * 100 * 5);
}

TEST_CASE("run_cycle: equal seeds give identical buffers and parameters") {
  TrainConfig c = tiny_config();
  Trainer t1(c);
  Trainer t2(c);
  t1.run_cycle();
  t2.run_cycle();
  REQUIRE(t1.buffer().size() == t2.buffer().size());
  for (std::size_t i = 0; i < t1.buffer().size(); i += 17) {
    CHECK(t1.buffer().slot(i).state == t2.buffer().slot(i).state);
    CHECK(t1.buffer().slot(i).goal == t2.buffer().slot(i).goal);
    CHECK(t1.buffer().slot(i).reward == t2.buffer().slot(i).reward);
  }
  CHECK(params_equal(t1.ensemble().actors[0].params, t2.ensemble().actors[0].params));
  CHECK(params_equal(t1.ensemble().critics[0].params, t2.ensemble().critics[0].params));
}

TEST_CASE("schedule bookkeeping at benchmark defaults") {
  TrainConfig c;
  c.adcp = {1, 1};
  c.env_name = "point_reach";
  c.hidden_sizes = {8};
  c.epochs = 1;
  c.eval_episodes = 1;
  c.seed = 11;
  // Benchmark counts: 15 cycles of 100 steps and 20 optimization steps.
  Trainer trainer(c);
  trainer.train();
  CHECK(trainer.env_steps() == 1500);
  CHECK(trainer.opt_steps() == 300);
  CHECK(trainer.buffer().size() == 7500);
}

TEST_CASE("train: smoke run emits one metrics row per epoch within ranges") {
  TrainConfig c = tiny_config();
  c.epochs = 2;
  Trainer trainer(c);
  const auto metrics = trainer.train();
  REQUIRE(metrics.size() == 2);
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    CHECK(metrics[i].epoch == i + 1);
    CHECK(metrics[i].success_rate >= 0.0);
    CHECK(metrics[i].success_rate <= 1.0);
    CHECK(metrics[i].mean_reward >= -100.0);
    CHECK(metrics[i].mean_reward <= 0.0);
    CHECK(std::isfinite(metrics[i].mean_q));
  }
}

TEST_CASE("train: identical seeds give bit-identical metrics") {
  TrainConfig c = tiny_config();
  c.epochs = 2;
  Trainer t1(c);
  Trainer t2(c);
  const auto m1 = t1.train();
  const auto m2 = t2.train();
  REQUIRE(m1.size() == m2.size());
  for (std::size_t i = 0; i < m1.size(); ++i) {
    CHECK(m1[i].success_rate == m2[i].success_rate);
    CHECK(m1[i].mean_reward == m2[i].mean_reward);
    CHECK(m1[i].mean_q == m2[i].mean_q);
  }
}

TEST_CASE("evaluate: repeated evaluation with fixed parameters is bit-identical") {
  TrainConfig c = tiny_config();
  Trainer trainer(c);
  trainer.run_cycle();
  auto env = make_env(c.env_name);
  const EpochMetrics a = evaluate(trainer.ensemble(), trainer.normalizer(), *env, 3, Rng(21));
  const EpochMetrics b = evaluate(trainer.ensemble(), trainer.normalizer(), *env, 3, Rng(21));
  CHECK(a.success_rate == b.success_rate);
  CHECK(a.mean_reward == b.mean_reward);
  CHECK(a.mean_q == b.mean_q);
}

TEST_CASE("evaluate_policy: a scripted expert solves aubo_reach every episode") {
  auto env = make_env("aubo_reach");
  const PolicyFn expert = [](const GoalObservation& obs) {
    Vec a(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = clamp((obs.desired_goal[i] - obs.state[i]) / 0.2, -1.0, 1.0);
    }
    return a;
  };
  const ValueFn zero = [](const GoalObservation&, const Vec&) { return 0.0; };
  const EpochMetrics m = evaluate_policy(expert, zero, *env, 20, Rng(22));
  CHECK(m.success_rate == 1.0);
  CHECK(m.mean_reward > -40.0);
  CHECK(m.mean_reward <= 0.0);
}

TEST_CASE("evaluate_policy: an untrained policy on point_reach barely succeeds") {
  TrainConfig c = tiny_config();
  Trainer trainer(c);
  auto env = make_env(c.env_name);
  const EpochMetrics m =
      evaluate(trainer.ensemble(), trainer.normalizer(), *env, 20, Rng(23));
  CHECK(m.success_rate <= 0.3);
  CHECK(m.mean_reward < -80.0);
}

TEST_CASE("trainer: rollout must cover whole episodes") {
  TrainConfig c = tiny_config();
  c.rollout_steps = 37;
  CHECK_THROWS_AS(Trainer{c}, ContractViolation);
}
