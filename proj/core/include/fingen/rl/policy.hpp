#pragma once

#include <random>
#include <span>
#include <vector>

#include "fingen/nn/network.hpp"

namespace fingen::rl {

// Flat parameter vector laid out as [actor | critic | log_std].
struct PolicyParams {
  std::vector<double> values;
};

struct ActionSample {
  std::vector<double> action;      // bound * tanh(pre_squash)
  std::vector<double> pre_squash;  // Gaussian draw z
  double log_prob = 0.0;           // log density of `action`
};

// Tanh-squashed diagonal Gaussian actor with a state-independent log-std and
// a separate value network. The critic input may differ from the actor input
// (centralized critic).
class ActorCritic {
 public:
  ActorCritic(int observation_size, int critic_input_size, std::vector<double> action_bound,
              const std::vector<int>& actor_hidden, const std::vector<int>& critic_hidden);

  int observation_size() const { return observation_size_; }
  int critic_input_size() const { return critic_input_size_; }
  int action_size() const { return static_cast<int>(bound_.size()); }
  const std::vector<double>& action_bound() const { return bound_; }
  const nn::Network& actor() const { return actor_; }
  const nn::Network& critic() const { return critic_; }

  std::size_t parameter_count() const { return actor_.parameter_count() + critic_.parameter_count() + bound_.size(); }
  std::span<const double> actor_params(const PolicyParams& p) const;
  std::span<const double> critic_params(const PolicyParams& p) const;
  std::span<const double> log_std(const PolicyParams& p) const;
  std::size_t critic_offset() const { return actor_.parameter_count(); }
  std::size_t log_std_offset() const { return actor_.parameter_count() + critic_.parameter_count(); }

  // Small output layer for the mean, log_std = initial_log_std everywhere.
  PolicyParams initial(std::mt19937_64& rng, double initial_log_std) const;

  // Actor means for a batch of observations, shape {B, action_size}.
  nn::Tensor mean(const PolicyParams& p, const nn::Tensor& observations, nn::ForwardRecord* record = nullptr) const;
  std::vector<double> value(const PolicyParams& p, const nn::Tensor& critic_inputs,
                            nn::ForwardRecord* record = nullptr) const;
  double value(const PolicyParams& p, std::span<const double> critic_input) const;

  ActionSample sample(const PolicyParams& p, std::span<const double> observation, std::mt19937_64& rng) const;
  std::vector<double> deterministic_action(const PolicyParams& p, std::span<const double> observation) const;

  // Log density of the squashed action reached from pre-squash z.
  double log_prob(std::span<const double> mean, std::span<const double> log_std, std::span<const double> z) const;
  // Entropy of the pre-squash Gaussian.
  static double entropy(std::span<const double> log_std);

 private:
  int observation_size_;
  int critic_input_size_;
  std::vector<double> bound_;
  nn::Network actor_;
  nn::Network critic_;
};

// log(1 - tanh(z)^2), stable for large |z|.
double log_one_minus_tanh2(double z);

}  // namespace fingen::rl
