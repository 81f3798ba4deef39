#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aacher/envs.hpp"
#include "aacher/networks.hpp"
#include "aacher/normalizer.hpp"
#include "aacher/replay.hpp"

namespace aacher {

// Training schedule and hyperparameters. Defaults are the benchmark settings:
// 25 epochs of 15 cycles, 100-step rollouts followed by 20 optimization steps
// on 256-sized batches, gamma 0.98, tau 0.01, learning rates 1e-3,
// exploration noise variance 0.2, 4 hindsight goals per transition, and a
// 10^6 circular replay buffer.
struct TrainConfig {
  AdcpSpec adcp;
  std::string env_name = "aubo_reach";
  EnvOptions env_options;
  std::size_t epochs = 25;
  std::size_t cycles_per_epoch = 15;
  std::size_t rollout_steps = 100;
  std::size_t opt_steps_per_cycle = 20;
  std::size_t batch_size = 256;
  double gamma = 0.98;
  double tau = 0.01;
  double actor_lr = 0.001;
  double critic_lr = 0.001;
  double noise_var = 0.2;
  std::size_t her_k = 4;
  std::size_t buffer_capacity = 1000000;
  double l2_coeff = 1.0;
  std::size_t eval_episodes = 10;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden_sizes = {256, 256, 256};
  double clip_range = 5.0;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double success_rate = 0.0;
  double mean_reward = 0.0;
  double mean_q = 0.0;
};

// Actor-magnitude penalty coefficient in the actor objective.
constexpr double kActionPenalty = 1.0;

// Behavioral action: averaged policy on the normalized observation plus
// clipped zero-mean Gaussian noise of the given standard deviation.
Vec explore_action(const Ensemble& ens, const ObsNormalizer& norm, const GoalObservation& obs,
                   double noise_std, Rng& rng);

// l2_coeff times the sum of squared critic weights.
double critic_l2(const Ensemble& ens, double l2_coeff);

// n noise-free episodes under a deterministic policy. success_rate counts
// episodes whose final step succeeds, mean_reward is the mean per-episode
// summed reward, mean_q averages the value estimate over all visited
// (observation, action) pairs.
using PolicyFn = std::function<Vec(const GoalObservation&)>;
using ValueFn = std::function<double(const GoalObservation&, const Vec&)>;
EpochMetrics evaluate_policy(const PolicyFn& policy, const ValueFn& value, GoalEnv& env,
                             std::size_t n, Rng rng);

// Evaluation of the averaged ensemble policy with Q_avg as the value estimate.
EpochMetrics evaluate(const Ensemble& ens, const ObsNormalizer& norm, GoalEnv& env,
                      std::size_t n, Rng rng);

// One training run: seeded sub-streams for initialization, environment
// resets, exploration noise, hindsight goal draws and batch sampling, so that
// a seed fully determines the run.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  // One rollout of rollout_steps, hindsight expansion and storage, normalizer
  // update, then opt_steps_per_cycle optimization steps with soft target
  // updates.
  void run_cycle();

  // Full schedule; returns one metrics row per epoch. The optional callback
  // fires after each epoch's evaluation (checkpointing, progress logging).
  using EpochCallback = std::function<void(const EpochMetrics&)>;
  std::vector<EpochMetrics> train(const EpochCallback& on_epoch = {});

  EpochMetrics evaluate_now();

  const TrainConfig& config() const { return config_; }
  const Ensemble& ensemble() const { return ensemble_; }
  const ObsNormalizer& normalizer() const { return normalizer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const GoalEnv& env() const { return *env_; }
  std::uint64_t env_steps() const { return env_steps_; }
  std::uint64_t opt_steps() const { return opt_steps_; }

 private:
  std::vector<Transition> normalized_batch(const std::vector<Transition>& batch) const;

  TrainConfig config_;
  std::unique_ptr<GoalEnv> env_;
  std::unique_ptr<GoalEnv> eval_env_;
  Ensemble ensemble_;
  ObsNormalizer normalizer_;
  ReplayBuffer buffer_;
  Rng root_rng_;
  Rng env_rng_;
  Rng noise_rng_;
  Rng her_rng_;
  Rng sample_rng_;
  double noise_std_ = 0.0;
  std::uint64_t env_steps_ = 0;
  std::uint64_t opt_steps_ = 0;
  std::size_t current_epoch_ = 0;  // 1-based while training
  std::size_t current_cycle_ = 0;
};

}  // namespace aacher
