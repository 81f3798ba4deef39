#include "aacher/envs.hpp"

#include <cmath>

#include "aacher/errors.hpp"

namespace aacher {

const Vec kAuboTrainGoal = {-0.503, 0.605, -1.676, 1.391};

GoalObservation GoalEnv::reset(Rng& rng) {
  steps_taken_ = 0;
  in_episode_ = true;
  return do_reset(rng);
}

StepResult GoalEnv::step(const Vec& action) {
  if (!in_episode_ || steps_taken_ >= spec_.horizon) {
    throw ContractViolation("GoalEnv::step: episode over, reset first");
  }
  if (action.size() != spec_.action_dim) {
    throw ContractViolation("GoalEnv::step: action dim mismatch");
  }
  Vec clipped = action;
  for (double& a : clipped) a = clamp(a, -spec_.max_action, spec_.max_action);

  StepResult r;
  r.obs = do_step(clipped);
  ++steps_taken_;
  r.reward = reward(r.obs.achieved_goal, r.obs.desired_goal);
  r.success = r.reward == 0.0;
  r.done = steps_taken_ == spec_.horizon;
  if (r.done) in_episode_ = false;
  return r;
}

namespace {

double l1_distance(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

double euclidean(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    d += x * x;
  }
  return std::sqrt(d);
}

// 4-joint kinematic arm: actions are joint increments of at most 0.2 rad.
class AuboReachEnv final : public GoalEnv {
 public:
  static constexpr double kJointLimit = 1.7;
  static constexpr double kActionScale = 0.2;

  explicit AuboReachEnv(const EnvOptions& opt) {
    spec_.name = "aubo_reach";
    spec_.state_dim = 4;
    spec_.action_dim = 4;
    spec_.goal_dim = 4;
    spec_.max_action = 1.0;
    spec_.horizon = opt.horizon.value_or(100);
    spec_.success_threshold = opt.success_threshold.value_or(0.1);
    randomize_goal_ = opt.randomize_goal.value_or(false);
  }

  double reward(const Vec& achieved, const Vec& goal) const override {
    if (achieved.size() != goal.size()) throw ContractViolation("reward: length mismatch");
    return l1_distance(achieved, goal) < spec_.success_threshold ? 0.0 : -1.0;
  }

 private:
  GoalObservation do_reset(Rng& rng) override {
    joints_.resize(4);
    for (double& j : joints_) j = rng.uniform(-kJointLimit, kJointLimit);
    if (randomize_goal_) {
      goal_.resize(4);
      for (double& g : goal_) g = rng.uniform(-kJointLimit, kJointLimit);
    } else {
      goal_ = kAuboTrainGoal;
    }
    return observe();
  }

  GoalObservation do_step(const Vec& action) override {
    for (std::size_t i = 0; i < 4; ++i) {
      joints_[i] = clamp(joints_[i] + kActionScale * action[i], -kJointLimit, kJointLimit);
    }
    return observe();
  }

  GoalObservation observe() const { return {joints_, joints_, goal_}; }

  bool randomize_goal_ = false;
  Vec joints_;
  Vec goal_;
};

// Planar point agent moving toward a target position.
class PointReachEnv final : public GoalEnv {
 public:
  static constexpr double kMoveScale = 0.05;

  explicit PointReachEnv(const EnvOptions& opt) {
    spec_.name = "point_reach";
    spec_.state_dim = 2;
    spec_.action_dim = 2;
    spec_.goal_dim = 2;
    spec_.max_action = 1.0;
    spec_.horizon = opt.horizon.value_or(100);
    spec_.success_threshold = opt.success_threshold.value_or(0.05);
    half_ = opt.workspace_half.value_or(1.0);
  }

  double reward(const Vec& achieved, const Vec& goal) const override {
    if (achieved.size() != goal.size()) throw ContractViolation("reward: length mismatch");
    return euclidean(achieved, goal) < spec_.success_threshold ? 0.0 : -1.0;
  }

 private:
  GoalObservation do_reset(Rng& rng) override {
    pos_ = {rng.uniform(-half_, half_), rng.uniform(-half_, half_)};
    goal_ = {rng.uniform(-half_, half_), rng.uniform(-half_, half_)};
    return {pos_, pos_, goal_};
  }

  GoalObservation do_step(const Vec& action) override {
    for (std::size_t i = 0; i < 2; ++i) {
      pos_[i] = clamp(pos_[i] + kMoveScale * action[i], -half_, half_);
    }
    return {pos_, pos_, goal_};
  }

  double half_ = 1.0;
  Vec pos_;
  Vec goal_;
};

// Agent drags a block: while the two overlap, the block follows the agent's
// displacement. The goal is a block position.
class PointPushEnv final : public GoalEnv {
 public:
  static constexpr double kMoveScale = 0.05;
  static constexpr double kContactRadius = 0.1;

  explicit PointPushEnv(const EnvOptions& opt) {
    spec_.name = "point_push";
    spec_.state_dim = 4;  // agent, block
    spec_.action_dim = 2;
    spec_.goal_dim = 2;
    spec_.max_action = 1.0;
    spec_.horizon = opt.horizon.value_or(100);
    spec_.success_threshold = opt.success_threshold.value_or(0.05);
    half_ = opt.workspace_half.value_or(1.0);
  }

  double reward(const Vec& achieved, const Vec& goal) const override {
    if (achieved.size() != goal.size()) throw ContractViolation("reward: length mismatch");
    return euclidean(achieved, goal) < spec_.success_threshold ? 0.0 : -1.0;
  }

 private:
  GoalObservation do_reset(Rng& rng) override {
    agent_ = {rng.uniform(-0.8 * half_, 0.8 * half_), rng.uniform(-0.8 * half_, 0.8 * half_)};
    block_ = {rng.uniform(-0.4 * half_, 0.4 * half_), rng.uniform(-0.4 * half_, 0.4 * half_)};
    goal_ = {rng.uniform(-0.6 * half_, 0.6 * half_), rng.uniform(-0.6 * half_, 0.6 * half_)};
    return observe();
  }

  GoalObservation do_step(const Vec& action) override {
    Vec before = agent_;
    for (std::size_t i = 0; i < 2; ++i) {
      agent_[i] = clamp(agent_[i] + kMoveScale * action[i], -half_, half_);
    }
    if (euclidean(agent_, block_) < kContactRadius) {
      for (std::size_t i = 0; i < 2; ++i) {
        block_[i] = clamp(block_[i] + (agent_[i] - before[i]), -half_, half_);
      }
    }
    return observe();
  }

  GoalObservation observe() const {
    return {{agent_[0], agent_[1], block_[0], block_[1]}, block_, goal_};
  }

  double half_ = 1.0;
  Vec agent_;
  Vec block_;
  Vec goal_;
};

// Agent is confined to a launch band on the left and must shoot the block at
// a distant goal: contact sets the block velocity to twice the agent's
// displacement, after which the block coasts with per-step friction decay.
class PointSlideEnv final : public GoalEnv {
 public:
  static constexpr double kMoveScale = 0.05;
  static constexpr double kContactRadius = 0.1;
  static constexpr double kImpulse = 2.0;
  static constexpr double kFriction = 0.95;
  static constexpr double kLaunchMaxX = -0.2;

  explicit PointSlideEnv(const EnvOptions& opt) {
    spec_.name = "point_slide";
    spec_.state_dim = 6;  // agent, block, block velocity
    spec_.action_dim = 2;
    spec_.goal_dim = 2;
    spec_.max_action = 1.0;
    spec_.horizon = opt.horizon.value_or(100);
    spec_.success_threshold = opt.success_threshold.value_or(0.05);
    half_ = opt.workspace_half.value_or(1.2);
  }

  double reward(const Vec& achieved, const Vec& goal) const override {
    if (achieved.size() != goal.size()) throw ContractViolation("reward: length mismatch");
    return euclidean(achieved, goal) < spec_.success_threshold ? 0.0 : -1.0;
  }

 private:
  GoalObservation do_reset(Rng& rng) override {
    agent_ = {rng.uniform(-half_, kLaunchMaxX), rng.uniform(-1.0, 1.0)};
    block_ = {rng.uniform(-0.9, -0.4), rng.uniform(-0.6, 0.6)};
    vel_ = {0.0, 0.0};
    goal_ = {rng.uniform(0.0, 1.0), rng.uniform(-0.8, 0.8)};
    return observe();
  }

  GoalObservation do_step(const Vec& action) override {
    Vec before = agent_;
    agent_[0] = clamp(agent_[0] + kMoveScale * action[0], -half_, kLaunchMaxX);
    agent_[1] = clamp(agent_[1] + kMoveScale * action[1], -1.0, 1.0);
    if (euclidean(agent_, block_) < kContactRadius) {
      vel_ = {kImpulse * (agent_[0] - before[0]), kImpulse * (agent_[1] - before[1])};
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const double target = block_[i] + vel_[i];
      const double clipped = clamp(target, -half_, half_);
      if (clipped != target) vel_ = {0.0, 0.0};  // dead stop at the walls
      block_[i] = clipped;
    }
    for (double& v : vel_) v *= kFriction;
    return observe();
  }

  GoalObservation observe() const {
    return {{agent_[0], agent_[1], block_[0], block_[1], vel_[0], vel_[1]}, block_, goal_};
  }

  double half_ = 1.2;
  Vec agent_;
  Vec block_;
  Vec vel_;
  Vec goal_;
};

}  // namespace

std::unique_ptr<GoalEnv> make_env(const std::string& name, const EnvOptions& options) {
  if (name == "aubo_reach") return std::make_unique<AuboReachEnv>(options);
  if (name == "point_reach") return std::make_unique<PointReachEnv>(options);
  if (name == "point_push") return std::make_unique<PointPushEnv>(options);
  if (name == "point_slide") return std::make_unique<PointSlideEnv>(options);
  throw ParseError("unknown environment '" + name +
                   "' (expected aubo_reach, point_reach, point_push or point_slide)");
}

}  // namespace aacher
