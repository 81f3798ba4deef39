#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "aacher/numeric.hpp"
#include "aacher/rng.hpp"

namespace aacher {

struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::size_t goal_dim = 0;
  double max_action = 1.0;
  std::size_t horizon = 100;
  double success_threshold = 0.05;
};

struct GoalObservation {
  Vec state;
  Vec achieved_goal;
  Vec desired_goal;
};

struct StepResult {
  GoalObservation obs;
  double reward = -1.0;
  bool done = false;
  bool success = false;
};

struct EnvOptions {
  std::optional<std::size_t> horizon;
  std::optional<double> success_threshold;
  std::optional<bool> randomize_goal;    // aubo_reach: sample goals instead of the fixed one
  std::optional<double> workspace_half;  // point envs: half-extent of the square workspace
};

// Goal-conditioned environment with a sparse {-1, 0} reward. Episodes are
// fixed length: success never terminates early, stepping past the horizon is
// a contract violation.
class GoalEnv {
 public:
  virtual ~GoalEnv() = default;

  const EnvSpec& spec() const { return spec_; }

  GoalObservation reset(Rng& rng);
  StepResult step(const Vec& action);

  // Pure sparse reward, shared with hindsight relabeling.
  virtual double reward(const Vec& achieved, const Vec& goal) const = 0;

 protected:
  virtual GoalObservation do_reset(Rng& rng) = 0;
  virtual GoalObservation do_step(const Vec& clipped_action) = 0;

  EnvSpec spec_;
  std::size_t steps_taken_ = 0;
  bool in_episode_ = false;
};

// Names: aubo_reach, point_reach, point_push, point_slide.
std::unique_ptr<GoalEnv> make_env(const std::string& name, const EnvOptions& options = {});

// Fixed training goal of the 4-joint arm analogue.
extern const Vec kAuboTrainGoal;

}  // namespace aacher
