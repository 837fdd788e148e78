#pragma once

#include <vector>

#include "fingen/rl/env.hpp"

namespace fingen::rl {

// reward = -|a - target|^2 in one step; the observation is a constant vector.
class QuadraticToy final : public Environment {
 public:
  explicit QuadraticToy(std::vector<double> target, double bound = 1.0);

  int observation_size() const override { return static_cast<int>(target_.size()); }
  int action_size() const override { return static_cast<int>(target_.size()); }
  std::vector<double> action_bound() const override { return std::vector<double>(target_.size(), bound_); }
  std::unique_ptr<Episode> start(std::uint64_t seed) const override;

  const std::vector<double>& target() const { return target_; }

 private:
  std::vector<double> target_;
  double bound_;
};

}  // namespace fingen::rl
