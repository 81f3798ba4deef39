#pragma once

#include <cstddef>

#include "aacher/envs.hpp"
#include "aacher/numeric.hpp"

namespace aacher {

// Running per-dimension mean/std over one vector space. Identity until the
// first update; the variance estimate is floored at 1e-4 so constant
// dimensions (a fixed goal) normalize to a bounded value.
class RunningStat {
 public:
  RunningStat() = default;
  explicit RunningStat(std::size_t dim) : sum_(dim, 0.0), sumsq_(dim, 0.0) {}

  void update(const Vec& x);
  void normalize(const Vec& x, double clip, Vec& out) const;

  std::size_t dim() const { return sum_.size(); }
  double count() const { return count_; }
  double mean(std::size_t i) const { return count_ > 0.0 ? sum_[i] / count_ : 0.0; }
  double stddev(std::size_t i) const;

  // Checkpoint access.
  const Vec& sum() const { return sum_; }
  const Vec& sumsq() const { return sumsq_; }
  void restore(double count, Vec sum, Vec sumsq);

 private:
  double count_ = 0.0;
  Vec sum_;
  Vec sumsq_;
};

// Normalizes states and goals independently and assembles the clipped
// state||goal network input.
struct ObsNormalizer {
  RunningStat state;
  RunningStat goal;
  double clip_range = 5.0;

  ObsNormalizer() = default;
  ObsNormalizer(std::size_t state_dim, std::size_t goal_dim, double clip)
      : state(state_dim), goal(goal_dim), clip_range(clip) {}

  Vec normalized_sg(const Vec& s, const Vec& g) const;
  Vec normalized_sg(const GoalObservation& obs) const {
    return normalized_sg(obs.state, obs.desired_goal);
  }
};

}  // namespace aacher
