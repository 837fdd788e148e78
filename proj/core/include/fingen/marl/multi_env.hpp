#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fingen/rl/env.hpp"
#include "fingen/rl/fin_env.hpp"

namespace fingen::marl {

using JointActionValues = std::vector<std::vector<double>>;

class MultiAgentEpisode {
 public:
  virtual ~MultiAgentEpisode() = default;
  // Agent-local observation, without the agent index feature.
  virtual std::vector<double> observation(int agent) const = 0;
  virtual std::vector<double> global_state() const = 0;
  // One team reward for the joint action.
  virtual rl::StepOutcome step(const JointActionValues& actions) = 0;
  virtual nlohmann::json artifact() const { return nlohmann::json::object(); }
};

// Homogeneous agents: every agent has the same observation and action sizes.
class MultiAgentEnvironment {
 public:
  virtual ~MultiAgentEnvironment() = default;
  virtual int agents() const = 0;
  virtual int observation_size() const = 0;
  virtual int state_size() const = 0;
  virtual int action_size() const = 0;
  virtual std::vector<double> action_bound() const = 0;
  virtual int horizon() const { return 1; }
  virtual double reference_reward() const { return 1.0; }
  virtual std::unique_ptr<MultiAgentEpisode> start(std::uint64_t seed) const = 0;
};

// n = 1 view of a single-agent environment; global state = observation.
class SingleAgentAdapter final : public MultiAgentEnvironment {
 public:
  explicit SingleAgentAdapter(std::shared_ptr<const rl::Environment> env) : env_(std::move(env)) {}
  int agents() const override { return 1; }
  int observation_size() const override { return env_->observation_size(); }
  int state_size() const override { return env_->observation_size(); }
  int action_size() const override { return env_->action_size(); }
  std::vector<double> action_bound() const override { return env_->action_bound(); }
  int horizon() const override { return env_->horizon(); }
  double reference_reward() const override { return env_->reference_reward(); }
  std::unique_ptr<MultiAgentEpisode> start(std::uint64_t seed) const override;

 private:
  std::shared_ptr<const rl::Environment> env_;
};

// One agent per shape; each agent displaces only its own shape's control
// points, inside its own box. Team reward from one evaluation of the joint
// design. Shapes must share degree and segment count (homogeneous agents).
class MultiFinEnvironment final : public MultiAgentEnvironment {
 public:
  MultiFinEnvironment(geometry::DesignSpace initial, std::shared_ptr<const rl::Evaluator> evaluator,
                      rl::FinEnvConfig config = {}, std::optional<rl::Evaluation> reference = std::nullopt);

  int agents() const override { return static_cast<int>(initial_.shapes.size()); }
  int observation_size() const override { return per_agent_; }
  int state_size() const override { return per_agent_ * agents(); }
  int action_size() const override { return per_agent_; }
  std::vector<double> action_bound() const override { return bounds_; }
  int horizon() const override { return config_.horizon; }
  double reference_reward() const override { return reference_eval_.reward; }
  std::unique_ptr<MultiAgentEpisode> start(std::uint64_t seed) const override;

  const geometry::DesignSpace& initial() const { return initial_; }
  const rl::Evaluation& reference() const { return reference_eval_; }

 private:
  geometry::DesignSpace initial_;
  std::shared_ptr<const rl::Evaluator> evaluator_;
  rl::FinEnvConfig config_;
  int per_agent_ = 0;
  std::vector<double> bounds_;  // identical boxes, so one bound vector serves every agent
  rl::Evaluation reference_eval_;
};

// Additive team reward -sum_i |a_i - target_i|^2; agent i sees a constant
// observation. Used to check reductions and per-agent credit.
class SeparableStub final : public MultiAgentEnvironment {
 public:
  explicit SeparableStub(std::vector<std::vector<double>> targets, double bound = 1.0);
  int agents() const override { return static_cast<int>(targets_.size()); }
  int observation_size() const override { return static_cast<int>(targets_[0].size()); }
  int state_size() const override { return observation_size() * agents(); }
  int action_size() const override { return observation_size(); }
  std::vector<double> action_bound() const override {
    return std::vector<double>(targets_[0].size(), bound_);
  }
  std::unique_ptr<MultiAgentEpisode> start(std::uint64_t seed) const override;
  double agent_reward(int agent, const std::vector<double>& action) const;

 private:
  std::vector<std::vector<double>> targets_;
  double bound_;
};

}  // namespace fingen::marl
