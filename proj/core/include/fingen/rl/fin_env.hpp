#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fingen/geometry/design_space.hpp"
#include "fingen/rl/env.hpp"
#include "fingen/sim/flow.hpp"

namespace fingen::rl {

struct Evaluation {
  double heat_transfer = 0.0;
  double pressure_drop = 0.0;
  double reward = 0.0;
  bool failed = false;
  std::string failure;
};

// Scores a design. Implementations must be safe for concurrent evaluate().
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Evaluation evaluate(const geometry::DesignSpace& space) const = 0;
  virtual std::string name() const = 0;
};

class SimulatorBackend final : public Evaluator {
 public:
  SimulatorBackend(sim::FlowConditions conditions, int resolution = sim::kDefaultResolution,
                   sim::SolverConfig config = {});
  Evaluation evaluate(const geometry::DesignSpace& space) const override;
  std::string name() const override { return "simulator"; }
  const sim::FlowConditions& conditions() const { return conditions_; }
  int resolution() const { return resolution_; }

 private:
  sim::FlowConditions conditions_;
  int resolution_;
  sim::SolverConfig config_;
};

struct FinEnvConfig {
  double action_fraction = 0.1;  // a_max as a fraction of the box side, per axis
  int horizon = 1;               // steps per episode; reward only at the last step
  double failure_penalty = 0.0;  // raw reward for invalid or failed designs
};

// Displacements of the free control points of a layout's shapes, one
// (dx, dy) pair per free point in shape order, clamped to the shape's box.
class DesignEpisodeBase {
 public:
  DesignEpisodeBase(const geometry::DesignSpace& initial, const Evaluator& evaluator, const FinEnvConfig& config);

  const geometry::DesignSpace& design() const { return design_; }
  std::vector<double> shape_observation(std::size_t shape) const;
  void displace(std::size_t shape, std::span<const double> deltas);
  // Validate, evaluate and convert to a terminal outcome.
  StepOutcome finish() const;
  nlohmann::json artifact() const;

 protected:
  geometry::DesignSpace design_;
  const Evaluator& evaluator_;
  FinEnvConfig config_;
  mutable std::optional<Evaluation> last_;
};

std::vector<double> action_bounds_for(const geometry::DesignSpace& layout, std::size_t shape, double fraction);

// Single agent controlling every shape of a layout (the concatenation of all
// shapes' control points).
class FinEnvironment final : public Environment {
 public:
  FinEnvironment(geometry::DesignSpace initial, std::shared_ptr<const Evaluator> evaluator, FinEnvConfig config = {},
                 std::optional<Evaluation> reference = std::nullopt);

  int observation_size() const override { return observation_size_; }
  int action_size() const override { return static_cast<int>(bounds_.size()); }
  std::vector<double> action_bound() const override { return bounds_; }
  int horizon() const override { return config_.horizon; }
  double reference_reward() const override { return reference_; }
  std::unique_ptr<Episode> start(std::uint64_t seed) const override;

  const geometry::DesignSpace& initial() const { return initial_; }
  // Reference layout evaluation (rectangles at half box size); its reward
  // normalizes the learning signal.
  const Evaluation& reference() const { return reference_eval_; }

 private:
  geometry::DesignSpace initial_;
  std::shared_ptr<const Evaluator> evaluator_;
  FinEnvConfig config_;
  std::vector<double> bounds_;
  int observation_size_ = 0;
  Evaluation reference_eval_;
  double reference_ = 1.0;
};

}  // namespace fingen::rl
