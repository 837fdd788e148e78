#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fingen/nn/adam.hpp"
#include "fingen/rl/env.hpp"
#include "fingen/rl/policy.hpp"

namespace fingen::rl {

struct Transition {
  std::vector<double> observation;   // actor input
  std::vector<double> critic_input;  // critic input (equals observation for single-agent)
  std::vector<double> pre_squash;
  std::vector<double> action;
  double log_prob = 0.0;
  double reward = 0.0;  // normalized reward used for learning
  double value = 0.0;
  bool done = true;
};

struct Advantages {
  std::vector<double> raw;         // GAE(gamma, lambda)
  std::vector<double> returns;     // raw + value
  std::vector<double> normalized;  // zero mean, unit variance over the batch
};

// Transitions are consecutive episodes in order; each episode ends with
// done = true. Throws InputError on an empty batch or an unterminated tail.
Advantages compute_advantages(const std::vector<Transition>& batch, double gamma, double lambda);

// Mean 0 / std 1 in place (only centred when the spread is negligible).
void normalize(std::vector<double>& values);

struct LossCoefficients {
  double clip = 0.2;
  double value = 0.5;
  double entropy = 0.01;
};

struct LossReport {
  double total = 0.0;
  double surrogate = 0.0;  // -mean(min(r A, clip(r) A))
  double value_loss = 0.0;  // mean (V - R)^2
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;  // mean(old_logp - new_logp)
  std::vector<double> gradient;  // d total / d params
};

// Clipped surrogate + value MSE - entropy bonus over the given samples.
// `advantages` and `returns` are indexed like `samples`.
LossReport ppo_loss(const ActorCritic& model, const PolicyParams& params, const std::vector<Transition>& samples,
                    const std::vector<double>& advantages, const std::vector<double>& returns,
                    const LossCoefficients& coefficients);

struct PpoConfig {
  int batch_size = 40;  // episodes per update
  int epochs = 10;
  int minibatches = 4;
  double gamma = 0.99;
  double lambda = 0.95;
  LossCoefficients loss;
  double learning_rate = 1e-4;
  double max_grad_norm = 0.5;
  std::vector<int> actor_hidden{256, 256, 256};
  std::vector<int> critic_hidden{256, 256, 256};
  double initial_log_std = -0.69314718055994531;  // ln 0.5
  int episodes = 400;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  double max_failure_rate = 0.5;
};

nlohmann::json to_json(const PpoConfig& config);
PpoConfig ppo_config_from_json(const nlohmann::json& doc, PpoConfig defaults = {});  // throws ConfigError

struct EpisodeRecord {
  long episode = 0;
  double reward = 0.0;             // raw
  double normalized_reward = 0.0;  // raw / reference
  bool failed = false;
  std::map<std::string, double> info;
};

struct UpdateRecord {
  long update = 0;
  LossReport stats;  // averaged over minibatches of the last epoch; gradient left empty
};

struct BestDesign {
  long episode = -1;
  double reward = 0.0;
  nlohmann::json artifact;
};

// Minibatch PPO update shared by the single- and multi-agent trainers.
class PpoLearner {
 public:
  PpoLearner(const ActorCritic& model, PolicyParams params, const PpoConfig& config);

  // K epochs over shuffled minibatches; returns last-epoch mean statistics.
  LossReport update(const std::vector<Transition>& batch, const Advantages& advantages);

  const PolicyParams& params() const { return params_; }
  const nn::AdamState& optimizer() const { return adam_; }
  void restore(PolicyParams params, nn::AdamState optimizer);

 private:
  const ActorCritic& model_;
  PolicyParams params_;
  PpoConfig config_;
  nn::AdamState adam_;
  std::mt19937_64 rng_;
};

struct TrainResult {
  std::vector<EpisodeRecord> episodes;
  std::vector<UpdateRecord> updates;
  BestDesign best;
  PolicyParams params;
  nn::AdamState optimizer;
};

struct TrainCallbacks {
  // Every episode in order, with its artifact, before the batch's update.
  std::function<void(const EpisodeRecord&, const nlohmann::json& artifact)> on_episode;
  // After each update, with episodes of that batch and the update record.
  std::function<void(const std::vector<EpisodeRecord>&, const UpdateRecord&, const PpoLearner&)> on_update;
};

ActorCritic make_policy(const Environment& env, const PpoConfig& config);

// Collect batch_size episodes with per-episode seeded RNG, update, repeat
// until `episodes` episodes have run. Throws TrainingError when a batch's
// failure rate exceeds max_failure_rate.
TrainResult train(const Environment& env, const PpoConfig& config, const TrainCallbacks& callbacks = {});

}  // namespace fingen::rl
