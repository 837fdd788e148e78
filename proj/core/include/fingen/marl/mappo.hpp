#pragma once

#include <random>
#include <vector>

#include "fingen/marl/multi_env.hpp"
#include "fingen/rl/ppo.hpp"

namespace fingen::marl {

struct MappoConfig {
  rl::PpoConfig ppo = [] {
    rl::PpoConfig c;
    c.batch_size = 50;
    c.actor_hidden = {512, 512, 512};
    c.critic_hidden = {512, 512, 512};
    return c;
  }();
  bool agent_index = true;  // append a one-hot agent id to each observation
  // Agents whose actions are replaced by zeros (held at the initial shape).
  std::vector<int> frozen_agents;
};

nlohmann::json to_json(const MappoConfig& config);
MappoConfig mappo_config_from_json(const nlohmann::json& doc, MappoConfig defaults = {});

// Shared actor over (observation [+ one-hot id]); critic over the global state.
rl::ActorCritic make_shared_policy(const MultiAgentEnvironment& env, const MappoConfig& config);

// Actor input for one agent.
std::vector<double> agent_input(std::vector<double> observation, int agent, int agents, bool with_index);

struct JointAction {
  std::vector<rl::ActionSample> agents;
  JointActionValues values() const;
};

// Each agent samples from the shared actor given only its own input, in
// agent order from one RNG stream.
JointAction decentralized_act(const rl::ActorCritic& model, const rl::PolicyParams& params,
                              const std::vector<std::vector<double>>& agent_inputs, std::mt19937_64& rng);

double centralized_value(const rl::ActorCritic& model, const rl::PolicyParams& params,
                         const std::vector<double>& global_state);

struct JointRollout {
  std::vector<std::vector<rl::Transition>> per_agent;  // frozen agents stay empty
  rl::EpisodeRecord record;
  nlohmann::json artifact;
  std::string failure;
};

// One joint episode against an immutable snapshot. Acting reads only the
// per-agent inputs; the global state is logged for the critic.
JointRollout run_joint_episode(const MultiAgentEnvironment& env, const rl::ActorCritic& model,
                               const rl::PolicyParams& snapshot, const MappoConfig& config, long index);

// MAPPO: per-agent transitions share the team reward and the centralized
// value; advantages are normalized over the pooled batch.
rl::TrainResult mappo_train(const MultiAgentEnvironment& env, const MappoConfig& config,
                            const rl::TrainCallbacks& callbacks = {});

}  // namespace fingen::marl
