#include "fingen/marl/multi_env.hpp"

#include <cmath>

#include "fingen/errors.hpp"

namespace fingen::marl {

namespace {

class AdapterEpisode final : public MultiAgentEpisode {
 public:
  explicit AdapterEpisode(std::unique_ptr<rl::Episode> inner) : inner_(std::move(inner)) {}
  std::vector<double> observation(int) const override { return inner_->observation(); }
  std::vector<double> global_state() const override { return inner_->observation(); }
  rl::StepOutcome step(const JointActionValues& a) override { return inner_->step(a.at(0)); }
  nlohmann::json artifact() const override { return inner_->artifact(); }

 private:
  std::unique_ptr<rl::Episode> inner_;
};

class MultiFinEpisode final : public MultiAgentEpisode, public rl::DesignEpisodeBase {
 public:
  using DesignEpisodeBase::DesignEpisodeBase;

  std::vector<double> observation(int agent) const override { return shape_observation(agent); }
  std::vector<double> global_state() const override {
    std::vector<double> s;
    for (std::size_t k = 0; k < design_.shapes.size(); ++k) {
      const auto part = shape_observation(k);
      s.insert(s.end(), part.begin(), part.end());
    }
    return s;
  }
  rl::StepOutcome step(const JointActionValues& actions) override {
    if (actions.size() != design_.shapes.size()) throw InputError("joint action has the wrong number of agents");
    for (std::size_t k = 0; k < actions.size(); ++k) displace(k, actions[k]);
    if (++steps_ < config_.horizon) {
      rl::StepOutcome mid;
      mid.done = false;
      return mid;
    }
    return finish();
  }
  nlohmann::json artifact() const override { return DesignEpisodeBase::artifact(); }

 private:
  int steps_ = 0;
};

class StubEpisode final : public MultiAgentEpisode {
 public:
  explicit StubEpisode(const SeparableStub& env) : env_(env) {}
  std::vector<double> observation(int) const override { return std::vector<double>(env_.observation_size(), 1.0); }
  std::vector<double> global_state() const override { return std::vector<double>(env_.state_size(), 1.0); }
  rl::StepOutcome step(const JointActionValues& a) override {
    rl::StepOutcome out;
    for (int i = 0; i < env_.agents(); ++i) {
      const double r = env_.agent_reward(i, a[i]);
      out.reward += r;
      out.info["agent" + std::to_string(i)] = r;
    }
    return out;
  }

 private:
  const SeparableStub& env_;
};

}  // namespace

std::unique_ptr<MultiAgentEpisode> SingleAgentAdapter::start(std::uint64_t seed) const {
  return std::make_unique<AdapterEpisode>(env_->start(seed));
}

MultiFinEnvironment::MultiFinEnvironment(geometry::DesignSpace initial, std::shared_ptr<const rl::Evaluator> evaluator,
                                         rl::FinEnvConfig config, std::optional<rl::Evaluation> reference)
    : initial_(std::move(initial)), evaluator_(std::move(evaluator)), config_(config) {
  if (!evaluator_) throw InputError("environment needs an evaluator");
  if (initial_.shapes.empty() || initial_.boxes.size() != initial_.shapes.size()) {
    throw InputError("multi-agent layout needs one box per shape");
  }
  if (config_.horizon < 1) throw InputError("horizon must be at least 1");
  const auto report = geometry::validate_geometry(initial_);
  if (!report.ok()) throw PreconditionError("initial layout is invalid: " + report.summary());
  bounds_ = rl::action_bounds_for(initial_, 0, config_.action_fraction);
  for (std::size_t k = 1; k < initial_.shapes.size(); ++k) {
    const auto other = rl::action_bounds_for(initial_, k, config_.action_fraction);
    bool same = other.size() == bounds_.size();
    for (std::size_t d = 0; same && d < other.size(); ++d) same = std::abs(other[d] - bounds_[d]) <= 1e-12;
    if (!same) {
      throw InputError("homogeneous agents need identical shape structure and box sizes");
    }
  }
  per_agent_ = static_cast<int>(bounds_.size());
  reference_eval_ = reference ? *reference : evaluator_->evaluate(geometry::reference_layout(initial_));
  if (reference_eval_.failed || !(reference_eval_.reward > 0.0)) {
    throw Error("reference layout evaluation failed: " + reference_eval_.failure);
  }
}

std::unique_ptr<MultiAgentEpisode> MultiFinEnvironment::start(std::uint64_t) const {
  return std::make_unique<MultiFinEpisode>(initial_, *evaluator_, config_);
}

SeparableStub::SeparableStub(std::vector<std::vector<double>> targets, double bound)
    : targets_(std::move(targets)), bound_(bound) {
  if (targets_.empty() || targets_[0].empty()) throw InputError("stub needs at least one non-empty target");
  for (const auto& t : targets_) {
    if (t.size() != targets_[0].size()) throw InputError("stub targets must share a dimension");
  }
}

double SeparableStub::agent_reward(int agent, const std::vector<double>& action) const {
  double r = 0.0;
  for (std::size_t k = 0; k < action.size(); ++k) {
    const double d = action[k] - targets_[agent][k];
    r -= d * d;
  }
  return r;
}

std::unique_ptr<MultiAgentEpisode> SeparableStub::start(std::uint64_t) const {
  return std::make_unique<StubEpisode>(*this);
}

}  // namespace fingen::marl
