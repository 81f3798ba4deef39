#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aacher/mlp.hpp"
#include "aacher/replay.hpp"
#include "aacher/rng.hpp"

namespace aacher {

// Ensemble shape: d actors, p critics, rendered "A{d}C{p}".
struct AdcpSpec {
  std::size_t d = 1;
  std::size_t p = 1;

  std::string to_string() const {
    return "A" + std::to_string(d) + "C" + std::to_string(p);
  }
};

// Policy network: input state||goal, output an action squashed to
// +-max_action by a scaled tanh.
struct ActorNet {
  MlpParams params;
  double max_action = 1.0;
};

// Value network: input state||goal||action, scalar linear output.
struct CriticNet {
  MlpParams params;
};

// D actors and P critics, each paired with a slow-moving target copy and an
// Adam state. Members are independent random draws; targets start as exact
// copies of the mains.
struct Ensemble {
  AdcpSpec adcp;
  std::vector<ActorNet> actors;
  std::vector<CriticNet> critics;
  std::vector<ActorNet> target_actors;
  std::vector<CriticNet> target_critics;
  std::vector<AdamState> actor_adam;
  std::vector<AdamState> critic_adam;

  double max_action() const { return actors.front().max_action; }
};

Ensemble make_ensemble(const AdcpSpec& adcp, std::size_t obs_dim, std::size_t action_dim,
                       double max_action, const std::vector<std::size_t>& hidden_sizes,
                       Rng& init_rng);

// Element-wise mean of the D actor outputs (main or target set).
Vec actor_avg(const Ensemble& ens, const Vec& sg, bool use_targets);

// Mean of the P scalar critic outputs.
double critic_avg(const Ensemble& ens, const Vec& sg, const Vec& action, bool use_targets);

// Per transition y = r + gamma * Q_avg_target(s'||g, mu_avg_target(s'||g)),
// clipped to the valid sparse-return range [-1/(1-gamma), 0].
std::vector<double> critic_target(const Ensemble& ens, std::span<const Transition> batch,
                                  double gamma);

// One gradient step on every critic against the shared averaged TD loss
//   mean((y - Q_avg)^2) + l2_coeff * sum of squared critic weights.
// Each critic receives 1/P of the average's gradient plus its own weight
// penalty. Returns the pre-update loss including the penalty term.
double critic_update(Ensemble& ens, std::span<const Transition> batch, double gamma,
                     double lr, double l2_coeff);

// One gradient step on every actor against
//   -mean(Q_avg(s||g, mu_avg(s||g))) + action_penalty * mean(|mu_avg / max_action|^2).
// Each actor receives 1/D of the average's gradient; critics are unchanged.
// Returns the pre-update objective value.
double actor_update(Ensemble& ens, std::span<const Transition> batch, double lr,
                    double action_penalty);

// target <- tau * main + (1 - tau) * target for all D+P pairs.
void soft_update(Ensemble& ens, double tau);

// Sum of squared weight entries over all critics (biases and layer-norm
// parameters excluded).
double critic_weight_sq_sum(const Ensemble& ens);

}  // namespace aacher
