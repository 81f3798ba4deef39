#include "aacher/trainer.hpp"

#include <cmath>
#include <string>

#include "aacher/errors.hpp"

namespace aacher {

Vec explore_action(const Ensemble& ens, const ObsNormalizer& norm, const GoalObservation& obs,
                   double noise_std, Rng& rng) {
  Vec action = actor_avg(ens, norm.normalized_sg(obs), /*use_targets=*/false);
  const double max_action = ens.max_action();
  for (double& a : action) {
    a = clamp(a + rng.gaussian(0.0, noise_std), -max_action, max_action);
  }
  return action;
}

double critic_l2(const Ensemble& ens, double l2_coeff) {
  return l2_coeff * critic_weight_sq_sum(ens);
}

EpochMetrics evaluate_policy(const PolicyFn& policy, const ValueFn& value, GoalEnv& env,
                             std::size_t n, Rng rng) {
  if (n < 1) throw ContractViolation("evaluate: need at least one episode");
  const std::size_t horizon = env.spec().horizon;
  EpochMetrics m;
  double q_sum = 0.0;
  std::size_t q_count = 0;
  std::size_t successes = 0;
  double reward_sum = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    GoalObservation obs = env.reset(rng);
    bool final_success = false;
    for (std::size_t t = 0; t < horizon; ++t) {
      const Vec action = policy(obs);
      q_sum += value(obs, action);
      ++q_count;
      StepResult r = env.step(action);
      reward_sum += r.reward;
      final_success = r.success;
      obs = std::move(r.obs);
    }
    if (final_success) ++successes;
  }
  m.success_rate = static_cast<double>(successes) / static_cast<double>(n);
  m.mean_reward = reward_sum / static_cast<double>(n);
  m.mean_q = q_sum / static_cast<double>(q_count);
  return m;
}

EpochMetrics evaluate(const Ensemble& ens, const ObsNormalizer& norm, GoalEnv& env,
                      std::size_t n, Rng rng) {
  const PolicyFn policy = [&](const GoalObservation& obs) {
    return actor_avg(ens, norm.normalized_sg(obs), /*use_targets=*/false);
  };
  const ValueFn value = [&](const GoalObservation& obs, const Vec& action) {
    return critic_avg(ens, norm.normalized_sg(obs), action, /*use_targets=*/false);
  };
  return evaluate_policy(policy, value, env, n, std::move(rng));
}

Trainer::Trainer(TrainConfig config)
    : config_(std::move(config)),
      env_(make_env(config_.env_name, config_.env_options)),
      eval_env_(make_env(config_.env_name, config_.env_options)),
      buffer_(config_.buffer_capacity),
      root_rng_(config_.seed),
      env_rng_(root_rng_.stream("env")),
      noise_rng_(root_rng_.stream("noise")),
      her_rng_(root_rng_.stream("her")),
      sample_rng_(root_rng_.stream("sample")) {
  const EnvSpec& spec = env_->spec();
  if (config_.rollout_steps % spec.horizon != 0) {
    throw ContractViolation("Trainer: rollout_steps must cover whole episodes");
  }
  if (config_.gamma < 0.0 || config_.gamma >= 1.0) {
    throw ContractViolation("Trainer: gamma outside [0,1)");
  }
  if (config_.tau <= 0.0 || config_.tau > 1.0) {
    throw ContractViolation("Trainer: tau outside (0,1]");
  }
  Rng init_rng = root_rng_.stream("init");
  ensemble_ = make_ensemble(config_.adcp, spec.state_dim + spec.goal_dim, spec.action_dim,
                            spec.max_action, config_.hidden_sizes, init_rng);
  normalizer_ = ObsNormalizer(spec.state_dim, spec.goal_dim, config_.clip_range);
  noise_std_ = std::sqrt(config_.noise_var);
}

std::vector<Transition> Trainer::normalized_batch(const std::vector<Transition>& batch) const {
  std::vector<Transition> out = batch;
  for (Transition& t : out) {
    Vec tmp;
    normalizer_.state.normalize(t.state, config_.clip_range, tmp);
    t.state = tmp;
    normalizer_.state.normalize(t.next_state, config_.clip_range, tmp);
    t.next_state = tmp;
    normalizer_.goal.normalize(t.goal, config_.clip_range, tmp);
    t.goal = tmp;
  }
  return out;
}

void Trainer::run_cycle() {
  const std::size_t horizon = env_->spec().horizon;
  const std::size_t episodes = config_.rollout_steps / horizon;

  std::vector<Episode> rollouts;
  rollouts.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    Episode ep;
    ep.reserve(horizon);
    GoalObservation obs = env_->reset(env_rng_);
    for (std::size_t t = 0; t < horizon; ++t) {
      Vec action = explore_action(ensemble_, normalizer_, obs, noise_std_, noise_rng_);
      StepResult r = env_->step(action);
      ep.push_back(Transition{obs.state, obs.desired_goal, std::move(action), r.reward,
                              r.obs.state, r.obs.achieved_goal, r.success});
      obs = std::move(r.obs);
      ++env_steps_;
    }
    rollouts.push_back(std::move(ep));
  }

  // Normalizer sees only the newly rolled-out original-goal observations,
  // before this cycle's optimization steps.
  for (const Episode& ep : rollouts) {
    for (const Transition& t : ep) {
      normalizer_.state.update(t.state);
      normalizer_.goal.update(t.goal);
    }
  }

  const RewardFn reward_fn = [this](const Vec& achieved, const Vec& goal) {
    return env_->reward(achieved, goal);
  };
  for (const Episode& ep : rollouts) {
    const std::vector<Transition> expanded = her_expand(ep, config_.her_k, reward_fn, her_rng_);
    buffer_.store(expanded);
  }

  for (std::size_t step = 0; step < config_.opt_steps_per_cycle; ++step) {
    const std::vector<Transition> batch =
        normalized_batch(buffer_.sample(config_.batch_size, sample_rng_));
    try {
      critic_update(ensemble_, batch, config_.gamma, config_.critic_lr, config_.l2_coeff);
      actor_update(ensemble_, batch, config_.actor_lr, kActionPenalty);
    } catch (const TrainingDivergence& e) {
      throw TrainingDivergence("epoch " + std::to_string(current_epoch_) + " cycle " +
                                   std::to_string(current_cycle_) + ": " + e.what() +
                                   " (last stable epoch: " +
                                   std::to_string(current_epoch_ - 1) + ")",
                               e.layer_index);
    }
    soft_update(ensemble_, config_.tau);
    ++opt_steps_;
  }
}

EpochMetrics Trainer::evaluate_now() {
  return evaluate(ensemble_, normalizer_, *eval_env_, config_.eval_episodes,
                  root_rng_.stream("eval", current_epoch_));
}

std::vector<EpochMetrics> Trainer::train(const EpochCallback& on_epoch) {
  std::vector<EpochMetrics> metrics;
  metrics.reserve(config_.epochs);
  for (std::size_t epoch = 1; epoch <= config_.epochs; ++epoch) {
    current_epoch_ = epoch;
    for (std::size_t cycle = 1; cycle <= config_.cycles_per_epoch; ++cycle) {
      current_cycle_ = cycle;
      run_cycle();
    }
    EpochMetrics m = evaluate_now();
    m.epoch = epoch;
    metrics.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return metrics;
}

}  // namespace aacher
