#include "aacher/networks.hpp"

#include <cmath>

#include "aacher/errors.hpp"

namespace aacher {

namespace {

Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Vec concat(const Vec& a, const Vec& b, const Vec& c) {
  Vec out;
  out.reserve(a.size() + b.size() + c.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

}  // namespace

Ensemble make_ensemble(const AdcpSpec& adcp, std::size_t obs_dim, std::size_t action_dim,
                       double max_action, const std::vector<std::size_t>& hidden_sizes,
                       Rng& init_rng) {
  if (adcp.d < 1 || adcp.p < 1) throw ContractViolation("make_ensemble: need d >= 1 and p >= 1");
  if (max_action <= 0.0) throw ContractViolation("make_ensemble: max_action must be positive");

  std::vector<std::size_t> actor_sizes{obs_dim};
  actor_sizes.insert(actor_sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  actor_sizes.push_back(action_dim);
  std::vector<std::size_t> critic_sizes{obs_dim + action_dim};
  critic_sizes.insert(critic_sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  critic_sizes.push_back(1);

  Ensemble ens;
  ens.adcp = adcp;
  for (std::size_t i = 0; i < adcp.d; ++i) {
    ActorNet a;
    a.params = make_mlp(actor_sizes, OutputActivation::TanhScaled, max_action, init_rng);
    a.max_action = max_action;
    ens.actor_adam.push_back(adam_like(a.params));
    ens.actors.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < adcp.p; ++i) {
    CriticNet c;
    c.params = make_mlp(critic_sizes, OutputActivation::Linear, 1.0, init_rng);
    ens.critic_adam.push_back(adam_like(c.params));
    ens.critics.push_back(std::move(c));
  }
  ens.target_actors = ens.actors;
  ens.target_critics = ens.critics;
  return ens;
}

Vec actor_avg(const Ensemble& ens, const Vec& sg, bool use_targets) {
  const auto& actors = use_targets ? ens.target_actors : ens.actors;
  const std::size_t d = actors.size();
  Vec sum(actors.front().params.output_dim(), 0.0);
  ForwardCache cache;
  for (const ActorNet& a : actors) {
    const Vec& out = mlp_forward(a.params, sg, cache);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += out[j];
  }
  for (double& v : sum) v /= static_cast<double>(d);
  return sum;
}

double critic_avg(const Ensemble& ens, const Vec& sg, const Vec& action, bool use_targets) {
  const auto& critics = use_targets ? ens.target_critics : ens.critics;
  const Vec input = concat(sg, action);
  double sum = 0.0;
  ForwardCache cache;
  for (const CriticNet& c : critics) sum += mlp_forward(c.params, input, cache)[0];
  return sum / static_cast<double>(critics.size());
}

std::vector<double> critic_target(const Ensemble& ens, std::span<const Transition> batch,
                                  double gamma) {
  if (gamma < 0.0 || gamma >= 1.0) throw ContractViolation("critic_target: gamma outside [0,1)");
  const double floor = -1.0 / (1.0 - gamma);
  std::vector<double> ys;
  ys.reserve(batch.size());
  for (const Transition& t : batch) {
    const Vec next_sg = concat(t.next_state, t.goal);
    const Vec next_action = actor_avg(ens, next_sg, /*use_targets=*/true);
    const double q = critic_avg(ens, next_sg, next_action, /*use_targets=*/true);
    ys.push_back(clamp(t.reward + gamma * q, floor, 0.0));
  }
  return ys;
}

double critic_update(Ensemble& ens, std::span<const Transition> batch, double gamma,
                     double lr, double l2_coeff) {
  if (batch.empty()) throw ContractViolation("critic_update: empty batch");
  const std::size_t p = ens.critics.size();
  const double batch_n = static_cast<double>(batch.size());

  const std::vector<double> ys = critic_target(ens, batch, gamma);

  std::vector<MlpGrads> grads;
  grads.reserve(p);
  for (const CriticNet& c : ens.critics) grads.push_back(grads_like(c.params));
  std::vector<ForwardCache> caches(p);

  double td_loss = 0.0;
  Vec upstream(1);
  std::vector<double> qs(p);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Transition& t = batch[b];
    const Vec input = concat(t.state, t.goal, t.action);
    double q_sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      qs[i] = mlp_forward(ens.critics[i].params, input, caches[i])[0];
      q_sum += qs[i];
    }
    const double q_avg = q_sum / static_cast<double>(p);
    const double delta = ys[b] - q_avg;
    td_loss += delta * delta;
    // d(mean delta^2)/dQ_i: the average routes 1/P of the residual gradient
    // to each member.
    upstream[0] = -2.0 * delta / (batch_n * static_cast<double>(p));
    for (std::size_t i = 0; i < p; ++i) {
      mlp_backward(ens.critics[i].params, caches[i], upstream, grads[i]);
    }
  }
  td_loss /= batch_n;

  const double l2 = l2_coeff * critic_weight_sq_sum(ens);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t w = 0; w < grads[i].weights.size(); ++w) {
      const Mat& src = ens.critics[i].params.weights[w];
      Mat& dst = grads[i].weights[w];
      for (std::size_t e = 0; e < src.data.size(); ++e) {
        dst.data[e] += 2.0 * l2_coeff * src.data[e];
      }
    }
  }

  const double loss = td_loss + l2;
  if (!std::isfinite(loss)) throw TrainingDivergence("critic_update: non-finite loss");
  for (std::size_t i = 0; i < p; ++i) {
    adam_step(ens.critics[i].params, ens.critic_adam[i], grads[i], lr);
  }
  return loss;
}

double actor_update(Ensemble& ens, std::span<const Transition> batch, double lr,
                    double action_penalty) {
  if (batch.empty()) throw ContractViolation("actor_update: empty batch");
  const std::size_t d = ens.actors.size();
  const std::size_t p = ens.critics.size();
  const double batch_n = static_cast<double>(batch.size());
  const double max_action = ens.max_action();
  const std::size_t action_dim = ens.actors.front().params.output_dim();
  const std::size_t obs_dim = ens.actors.front().params.input_dim();

  std::vector<MlpGrads> grads;
  grads.reserve(d);
  for (const ActorNet& a : ens.actors) grads.push_back(grads_like(a.params));
  std::vector<ForwardCache> actor_caches(d);
  std::vector<ForwardCache> critic_caches(p);

  double objective = 0.0;
  Vec critic_upstream(1, 1.0);
  Vec avg_upstream(action_dim);
  Vec member_upstream(action_dim);
  for (const Transition& t : batch) {
    const Vec sg = concat(t.state, t.goal);

    Vec a_avg(action_dim, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      const Vec& out = mlp_forward(ens.actors[i].params, sg, actor_caches[i]);
      for (std::size_t j = 0; j < action_dim; ++j) a_avg[j] += out[j];
    }
    for (double& v : a_avg) v /= static_cast<double>(d);

    const Vec critic_input = concat(sg, a_avg);
    double q_sum = 0.0;
    Vec dq_da(action_dim, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      q_sum += mlp_forward(ens.critics[i].params, critic_input, critic_caches[i])[0];
      const Vec in_grad =
          mlp_backward_input(ens.critics[i].params, critic_caches[i], critic_upstream);
      for (std::size_t j = 0; j < action_dim; ++j) dq_da[j] += in_grad[obs_dim + j];
    }
    const double q_avg = q_sum / static_cast<double>(p);
    for (double& v : dq_da) v /= static_cast<double>(p);

    double penalty = 0.0;
    for (std::size_t j = 0; j < action_dim; ++j) {
      const double norm_a = a_avg[j] / max_action;
      penalty += norm_a * norm_a;
    }
    objective += -q_avg + action_penalty * penalty;

    for (std::size_t j = 0; j < action_dim; ++j) {
      avg_upstream[j] =
          (-dq_da[j] + 2.0 * action_penalty * a_avg[j] / (max_action * max_action)) / batch_n;
      member_upstream[j] = avg_upstream[j] / static_cast<double>(d);
    }
    for (std::size_t i = 0; i < d; ++i) {
      mlp_backward(ens.actors[i].params, actor_caches[i], member_upstream, grads[i]);
    }
  }
  objective /= batch_n;

  if (!std::isfinite(objective)) throw TrainingDivergence("actor_update: non-finite objective");
  for (std::size_t i = 0; i < d; ++i) {
    adam_step(ens.actors[i].params, ens.actor_adam[i], grads[i], lr);
  }
  return objective;
}

void soft_update(Ensemble& ens, double tau) {
  if (tau <= 0.0 || tau > 1.0) throw ContractViolation("soft_update: tau outside (0,1]");
  auto blend = [tau](const MlpParams& main, MlpParams& target) {
    for (std::size_t i = 0; i < main.weights.size(); ++i) {
      const auto& m = main.weights[i].data;
      auto& t = target.weights[i].data;
      for (std::size_t e = 0; e < m.size(); ++e) t[e] = tau * m[e] + (1.0 - tau) * t[e];
    }
    auto blend_vecs = [tau](const std::vector<Vec>& ms, std::vector<Vec>& ts) {
      for (std::size_t i = 0; i < ms.size(); ++i) {
        for (std::size_t e = 0; e < ms[i].size(); ++e) {
          ts[i][e] = tau * ms[i][e] + (1.0 - tau) * ts[i][e];
        }
      }
    };
    blend_vecs(main.biases, target.biases);
    blend_vecs(main.ln_gain, target.ln_gain);
    blend_vecs(main.ln_bias, target.ln_bias);
  };
  for (std::size_t i = 0; i < ens.actors.size(); ++i) {
    blend(ens.actors[i].params, ens.target_actors[i].params);
  }
  for (std::size_t i = 0; i < ens.critics.size(); ++i) {
    blend(ens.critics[i].params, ens.target_critics[i].params);
  }
}

double critic_weight_sq_sum(const Ensemble& ens) {
  double sum = 0.0;
  for (const CriticNet& c : ens.critics) {
    for (const Mat& w : c.params.weights) {
      for (double v : w.data) sum += v * v;
    }
  }
  return sum;
}

}  // namespace aacher
