#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fingen::rl {

struct StepOutcome {
  double reward = 0.0;  // raw (un-normalized) reward
  bool done = true;
  bool failed = false;  // reward is the failure penalty
  std::string failure;
  std::map<std::string, double> info;
};

// One rollout. Not shared between threads.
class Episode {
 public:
  virtual ~Episode() = default;
  virtual std::vector<double> observation() const = 0;
  virtual StepOutcome step(std::span<const double> action) = 0;
  // Whatever should be kept if this episode turns out best (e.g. the design).
  virtual nlohmann::json artifact() const { return nlohmann::json::object(); }
};

// Factory of independent episodes; start() must be safe to call concurrently.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int observation_size() const = 0;
  virtual int action_size() const = 0;
  // Half-range per action component; actions lie in [-bound, bound].
  virtual std::vector<double> action_bound() const = 0;
  virtual int horizon() const { return 1; }
  // Rewards are divided by this before learning so the baseline scores 1.
  virtual double reference_reward() const { return 1.0; }
  virtual std::unique_ptr<Episode> start(std::uint64_t seed) const = 0;
};

}  // namespace fingen::rl
