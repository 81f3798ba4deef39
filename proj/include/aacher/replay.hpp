#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "aacher/numeric.hpp"
#include "aacher/rng.hpp"

namespace aacher {

// One goal-conditioned step. `achieved_next` is the goal actually attained
// after the step, kept so rewards can be recomputed without the environment.
struct Transition {
  Vec state;
  Vec goal;
  Vec action;
  double reward = -1.0;
  Vec next_state;
  Vec achieved_next;
  bool success = false;
};

// Ordered steps sharing one original goal; next_state of step t is state of t+1.
using Episode = std::vector<Transition>;

using RewardFn = std::function<double(const Vec& achieved, const Vec& goal)>;

// Hindsight relabeling with the "future" strategy: each step t is emitted as-is
// plus k copies whose goal is the achieved state of a uniformly drawn index
// u in {t, ..., T-1}, with reward and success recomputed. Output length T*(k+1).
std::vector<Transition> her_expand(const Episode& episode, std::size_t k,
                                   const RewardFn& reward_fn, Rng& rng);

// Fixed-capacity circular store; once full, new entries overwrite the oldest.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void store(const Transition& t);
  void store(std::span<const Transition> transitions);

  // batch_size independent uniform draws with replacement over filled slots.
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& slot(std::size_t i) const { return storage_[i]; }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> storage_;
};

}  // namespace aacher
