#include "fingen/rl/policy.hpp"

#include <cmath>
#include <numbers>

#include "fingen/errors.hpp"

namespace fingen::rl {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
}

double log_one_minus_tanh2(double z) {
  const double a = std::abs(z);
  return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

ActorCritic::ActorCritic(int observation_size, int critic_input_size, std::vector<double> action_bound,
                         const std::vector<int>& actor_hidden, const std::vector<int>& critic_hidden)
    : observation_size_(observation_size),
      critic_input_size_(critic_input_size),
      bound_(std::move(action_bound)),
      actor_(nn::NetworkSpec::mlp(observation_size, actor_hidden, static_cast<int>(bound_.size()))),
      critic_(nn::NetworkSpec::mlp(critic_input_size, critic_hidden, 1)) {
  if (bound_.empty()) throw InputError("policy needs at least one action component");
  for (double b : bound_) {
    if (!(b > 0.0)) throw InputError("action bounds must be positive");
  }
}

std::span<const double> ActorCritic::actor_params(const PolicyParams& p) const {
  return std::span<const double>(p.values).subspan(0, actor_.parameter_count());
}

std::span<const double> ActorCritic::critic_params(const PolicyParams& p) const {
  return std::span<const double>(p.values).subspan(critic_offset(), critic_.parameter_count());
}

std::span<const double> ActorCritic::log_std(const PolicyParams& p) const {
  return std::span<const double>(p.values).subspan(log_std_offset(), bound_.size());
}

PolicyParams ActorCritic::initial(std::mt19937_64& rng, double initial_log_std) const {
  PolicyParams p;
  p.values = actor_.initial_parameters(rng, 0.01);
  const auto c = critic_.initial_parameters(rng, 1.0);
  p.values.insert(p.values.end(), c.begin(), c.end());
  p.values.insert(p.values.end(), bound_.size(), initial_log_std);
  return p;
}

nn::Tensor ActorCritic::mean(const PolicyParams& p, const nn::Tensor& observations, nn::ForwardRecord* record) const {
  return actor_.forward(actor_params(p), observations, record);
}

std::vector<double> ActorCritic::value(const PolicyParams& p, const nn::Tensor& critic_inputs,
                                       nn::ForwardRecord* record) const {
  return critic_.forward(critic_params(p), critic_inputs, record).data;
}

double ActorCritic::value(const PolicyParams& p, std::span<const double> critic_input) const {
  const nn::Tensor x({1, critic_input_size_}, std::vector<double>(critic_input.begin(), critic_input.end()));
  return critic_.forward(critic_params(p), x).data[0];
}

double ActorCritic::log_prob(std::span<const double> mean, std::span<const double> log_std,
                             std::span<const double> z) const {
  double lp = 0.0;
  for (std::size_t d = 0; d < bound_.size(); ++d) {
    const double e = (z[d] - mean[d]) * std::exp(-log_std[d]);
    lp += -0.5 * e * e - log_std[d] - kHalfLog2Pi;
    lp -= std::log(bound_[d]) + log_one_minus_tanh2(z[d]);
  }
  return lp;
}

double ActorCritic::entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double s : log_std) h += s + 0.5 + kHalfLog2Pi;
  return h;
}

ActionSample ActorCritic::sample(const PolicyParams& p, std::span<const double> observation,
                                 std::mt19937_64& rng) const {
  const nn::Tensor x({1, observation_size_}, std::vector<double>(observation.begin(), observation.end()));
  const auto mu = mean(p, x).data;
  const auto ls = log_std(p);
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample s;
  s.pre_squash.resize(bound_.size());
  s.action.resize(bound_.size());
  for (std::size_t d = 0; d < bound_.size(); ++d) {
    s.pre_squash[d] = mu[d] + std::exp(ls[d]) * normal(rng);
    s.action[d] = bound_[d] * std::tanh(s.pre_squash[d]);
  }
  s.log_prob = log_prob(mu, ls, s.pre_squash);
  return s;
}

std::vector<double> ActorCritic::deterministic_action(const PolicyParams& p, std::span<const double> observation) const {
  const nn::Tensor x({1, observation_size_}, std::vector<double>(observation.begin(), observation.end()));
  auto mu = mean(p, x).data;
  for (std::size_t d = 0; d < bound_.size(); ++d) mu[d] = bound_[d] * std::tanh(mu[d]);
  return mu;
}

}  // namespace fingen::rl
