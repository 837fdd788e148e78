#include "fingen/rl/fin_env.hpp"

#include <cmath>

#include "fingen/errors.hpp"
#include "fingen/geometry/geometry_io.hpp"

namespace fingen::rl {

SimulatorBackend::SimulatorBackend(sim::FlowConditions conditions, int resolution, sim::SolverConfig config)
    : conditions_(conditions), resolution_(resolution), config_(config) {
  conditions_.validate();
}

Evaluation SimulatorBackend::evaluate(const geometry::DesignSpace& space) const {
  const auto r = sim::run_simulation(space, conditions_, resolution_, config_);
  return {r.heat_transfer, r.pressure_drop, r.reward, r.diverged, r.failure};
}

std::vector<double> action_bounds_for(const geometry::DesignSpace& layout, std::size_t shape, double fraction) {
  const auto& box = layout.boxes.at(shape);
  std::vector<double> b;
  for (std::size_t k = 0; k < layout.shapes.at(shape).free_point_count(); ++k) {
    b.push_back(fraction * box.width());
    b.push_back(fraction * box.height());
  }
  return b;
}

DesignEpisodeBase::DesignEpisodeBase(const geometry::DesignSpace& initial, const Evaluator& evaluator,
                                     const FinEnvConfig& config)
    : design_(initial), evaluator_(evaluator), config_(config) {}

std::vector<double> DesignEpisodeBase::shape_observation(std::size_t shape) const {
  return geometry::normalized_control_points(design_.shapes.at(shape), design_.boxes.at(shape));
}

void DesignEpisodeBase::displace(std::size_t shape, std::span<const double> deltas) {
  design_.shapes.at(shape) = geometry::perturb_control_points(design_.shapes[shape], deltas, design_.boxes.at(shape));
  last_.reset();
}

StepOutcome DesignEpisodeBase::finish() const {
  StepOutcome out;
  const auto report = geometry::validate_geometry(design_);
  if (!report.ok()) {
    last_ = Evaluation{0.0, 0.0, config_.failure_penalty, true, "invalid design: " + report.summary()};
  } else {
    last_ = evaluator_.evaluate(design_);
    if (last_->failed) last_->reward = config_.failure_penalty;
  }
  out.reward = last_->reward;
  out.failed = last_->failed;
  out.failure = last_->failure;
  out.info = {{"Q", last_->heat_transfer}, {"Dp", last_->pressure_drop}};
  return out;
}

nlohmann::json DesignEpisodeBase::artifact() const {
  nlohmann::json j{{"design", geometry::to_json(design_)}};
  if (last_) {
    j["Q"] = last_->heat_transfer;
    j["Dp"] = last_->pressure_drop;
    j["reward"] = last_->reward;
  }
  return j;
}

namespace {

class FinEpisode final : public Episode, public DesignEpisodeBase {
 public:
  FinEpisode(const geometry::DesignSpace& initial, const Evaluator& evaluator, const FinEnvConfig& config)
      : DesignEpisodeBase(initial, evaluator, config) {}

  std::vector<double> observation() const override {
    std::vector<double> obs;
    for (std::size_t s = 0; s < design_.shapes.size(); ++s) {
      const auto part = shape_observation(s);
      obs.insert(obs.end(), part.begin(), part.end());
    }
    return obs;
  }

  StepOutcome step(std::span<const double> action) override {
    std::size_t at = 0;
    for (std::size_t s = 0; s < design_.shapes.size(); ++s) {
      const std::size_t n = design_.shapes[s].dof();
      displace(s, action.subspan(at, n));
      at += n;
    }
    ++steps_;
    if (steps_ < config_.horizon) {
      StepOutcome mid;
      mid.done = false;
      return mid;
    }
    return finish();
  }

  nlohmann::json artifact() const override { return DesignEpisodeBase::artifact(); }

 private:
  int steps_ = 0;
};

}  // namespace

FinEnvironment::FinEnvironment(geometry::DesignSpace initial, std::shared_ptr<const Evaluator> evaluator,
                               FinEnvConfig config, std::optional<Evaluation> reference)
    : initial_(std::move(initial)), evaluator_(std::move(evaluator)), config_(config) {
  if (!evaluator_) throw InputError("environment needs an evaluator");
  if (initial_.shapes.empty() || initial_.boxes.size() != initial_.shapes.size()) {
    throw InputError("environment layout needs one box per shape");
  }
  if (config_.horizon < 1) throw InputError("horizon must be at least 1");
  if (!(config_.action_fraction > 0.0)) throw InputError("action fraction must be positive");
  const auto report = geometry::validate_geometry(initial_);
  if (!report.ok()) throw PreconditionError("initial layout is invalid: " + report.summary());
  for (std::size_t s = 0; s < initial_.shapes.size(); ++s) {
    const auto b = action_bounds_for(initial_, s, config_.action_fraction);
    bounds_.insert(bounds_.end(), b.begin(), b.end());
  }
  observation_size_ = static_cast<int>(bounds_.size());
  reference_eval_ = reference ? *reference : evaluator_->evaluate(geometry::reference_layout(initial_));
  if (reference_eval_.failed || !(reference_eval_.reward > 0.0)) {
    throw Error("reference layout evaluation failed: " + reference_eval_.failure);
  }
  reference_ = reference_eval_.reward;
}

std::unique_ptr<Episode> FinEnvironment::start(std::uint64_t) const {
  return std::make_unique<FinEpisode>(initial_, *evaluator_, config_);
}

}  // namespace fingen::rl
