#include "fingen/rl/toy_env.hpp"

#include <cmath>

#include "fingen/errors.hpp"

namespace fingen::rl {

namespace {

class ToyEpisode final : public Episode {
 public:
  explicit ToyEpisode(const std::vector<double>& target) : target_(target) {}
  std::vector<double> observation() const override { return std::vector<double>(target_.size(), 1.0); }
  StepOutcome step(std::span<const double> action) override {
    StepOutcome out;
    for (std::size_t k = 0; k < target_.size(); ++k) out.reward -= (action[k] - target_[k]) * (action[k] - target_[k]);
    return out;
  }

 private:
  const std::vector<double>& target_;
};

}  // namespace

QuadraticToy::QuadraticToy(std::vector<double> target, double bound) : target_(std::move(target)), bound_(bound) {
  if (target_.empty()) throw InputError("toy target must be non-empty");
  for (double t : target_) {
    if (!(std::abs(t) < bound_)) throw InputError("toy target must lie strictly inside the action bounds");
  }
}

std::unique_ptr<Episode> QuadraticToy::start(std::uint64_t) const { return std::make_unique<ToyEpisode>(target_); }

}  // namespace fingen::rl
