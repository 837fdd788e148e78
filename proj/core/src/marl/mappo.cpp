#include "fingen/marl/mappo.hpp"

#include <algorithm>
#include <cmath>

#include "fingen/errors.hpp"
#include "fingen/rl/parallel.hpp"

namespace fingen::marl {

nlohmann::json to_json(const MappoConfig& c) {
  auto j = rl::to_json(c.ppo);
  j["agent_index"] = c.agent_index;
  j["frozen_agents"] = c.frozen_agents;
  return j;
}

MappoConfig mappo_config_from_json(const nlohmann::json& doc, MappoConfig c) {
  c.ppo = rl::ppo_config_from_json(doc, c.ppo);
  try {
    c.agent_index = doc.value("agent_index", c.agent_index);
    c.frozen_agents = doc.value("frozen_agents", c.frozen_agents);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad MAPPO setting: ") + e.what());
  }
  return c;
}

std::vector<double> agent_input(std::vector<double> observation, int agent, int agents, bool with_index) {
  if (with_index) {
    for (int k = 0; k < agents; ++k) observation.push_back(k == agent ? 1.0 : 0.0);
  }
  return observation;
}

rl::ActorCritic make_shared_policy(const MultiAgentEnvironment& env, const MappoConfig& config) {
  const int obs = env.observation_size() + (config.agent_index ? env.agents() : 0);
  return rl::ActorCritic(obs, env.state_size(), env.action_bound(), config.ppo.actor_hidden,
                         config.ppo.critic_hidden);
}

JointActionValues JointAction::values() const {
  JointActionValues v;
  for (const auto& a : agents) v.push_back(a.action);
  return v;
}

JointAction decentralized_act(const rl::ActorCritic& model, const rl::PolicyParams& params,
                              const std::vector<std::vector<double>>& agent_inputs, std::mt19937_64& rng) {
  JointAction joint;
  for (const auto& input : agent_inputs) joint.agents.push_back(model.sample(params, input, rng));
  return joint;
}

double centralized_value(const rl::ActorCritic& model, const rl::PolicyParams& params,
                         const std::vector<double>& global_state) {
  if (static_cast<int>(global_state.size()) != model.critic_input_size()) {
    throw ShapeError("global state has " + std::to_string(global_state.size()) + " entries, critic expects " +
                     std::to_string(model.critic_input_size()));
  }
  return model.value(params, global_state);
}

JointRollout run_joint_episode(const MultiAgentEnvironment& env, const rl::ActorCritic& model,
                               const rl::PolicyParams& snapshot, const MappoConfig& config, long index) {
  const auto& ppo = config.ppo;
  const int n = env.agents();
  std::vector<char> frozen(n, 0);
  for (int a : config.frozen_agents) {
    if (a < 0 || a >= n) throw ConfigError("frozen agent index out of range");
    frozen[a] = 1;
  }
  std::mt19937_64 rng(rl::derive_seed(ppo.seed, 1000 + static_cast<std::uint64_t>(index)));
  auto ep = env.start(rl::derive_seed(ppo.seed, 5000000 + static_cast<std::uint64_t>(index)));
  JointRollout out;
  out.per_agent.resize(n);
  out.record.episode = index;
  std::vector<double> action_norm(n, 0.0);
  for (int t = 0; t < env.horizon(); ++t) {
    const auto state = ep->global_state();
    std::vector<std::vector<double>> inputs;
    for (int a = 0; a < n; ++a) inputs.push_back(agent_input(ep->observation(a), a, n, config.agent_index));
    auto joint = decentralized_act(model, snapshot, inputs, rng);
    const double value = centralized_value(model, snapshot, state);
    auto actions = joint.values();
    for (int a = 0; a < n; ++a) {
      if (frozen[a]) std::fill(actions[a].begin(), actions[a].end(), 0.0);
      for (double x : actions[a]) action_norm[a] += x * x;
    }
    const auto outcome = ep->step(actions);
    const bool done = outcome.done || t + 1 == env.horizon();
    const double reference = env.reference_reward();
    for (int a = 0; a < n; ++a) {
      if (frozen[a]) continue;
      rl::Transition tr;
      tr.observation = inputs[a];
      tr.critic_input = state;
      tr.pre_squash = joint.agents[a].pre_squash;
      tr.action = joint.agents[a].action;
      tr.log_prob = joint.agents[a].log_prob;
      tr.reward = outcome.reward / reference;
      tr.value = value;
      tr.done = done;
      out.per_agent[a].push_back(std::move(tr));
    }
    out.record.reward += outcome.reward;
    out.record.failed = out.record.failed || outcome.failed;
    if (outcome.failed && out.failure.empty()) out.failure = outcome.failure;
    for (const auto& [k, v] : outcome.info) out.record.info[k] = v;
    if (done) break;
  }
  for (int a = 0; a < n; ++a) out.record.info["agent" + std::to_string(a) + "_action_norm"] = std::sqrt(action_norm[a]);
  out.record.normalized_reward = out.record.reward / env.reference_reward();
  out.artifact = ep->artifact();
  return out;
}

rl::TrainResult mappo_train(const MultiAgentEnvironment& env, const MappoConfig& config,
                            const rl::TrainCallbacks& callbacks) {
  const auto& ppo = config.ppo;
  const int n = env.agents();
  if (n < 1) throw InputError("MAPPO needs at least one agent");
  for (int a : config.frozen_agents) {
    if (a < 0 || a >= n) throw ConfigError("frozen agent index out of range");
  }
  const auto model = make_shared_policy(env, config);
  std::mt19937_64 init_rng(rl::derive_seed(ppo.seed, 0x1417));
  rl::PpoLearner learner(model, model.initial(init_rng, ppo.initial_log_std), ppo);
  const double reference = env.reference_reward();
  if (!(std::abs(reference) > 0.0) || !std::isfinite(reference)) throw TrainingError("reference reward must be nonzero");
  const int workers = ppo.workers > 0 ? ppo.workers : rl::default_workers();

  rl::TrainResult result;
  long episode = 0;
  long update = 0;
  while (episode < ppo.episodes) {
    const int count = static_cast<int>(std::min<long>(ppo.batch_size, ppo.episodes - episode));
    std::vector<JointRollout> rollouts(count);
    const rl::PolicyParams snapshot = learner.params();
    rl::parallel_for(count, workers, [&](std::size_t b) {
      rollouts[b] = run_joint_episode(env, model, snapshot, config, episode + static_cast<long>(b));
    });

    std::vector<rl::Transition> batch;
    std::vector<rl::EpisodeRecord> records;
    int failures = 0;
    std::string first_failure;
    for (auto& r : rollouts) {
      for (auto& steps : r.per_agent) batch.insert(batch.end(), steps.begin(), steps.end());
      if (r.record.failed) {
        ++failures;
        if (first_failure.empty()) first_failure = r.failure;
      } else if (result.best.episode < 0 || r.record.reward > result.best.reward) {
        result.best = {r.record.episode, r.record.reward, r.artifact};
      }
      records.push_back(r.record);
      result.episodes.push_back(r.record);
      if (callbacks.on_episode) callbacks.on_episode(r.record, r.artifact);
    }
    if (static_cast<double>(failures) > ppo.max_failure_rate * count) {
      throw TrainingError(std::to_string(failures) + " of " + std::to_string(count) +
                          " joint episodes failed in one batch (first: " + first_failure + ")");
    }
    if (!batch.empty()) {
      const auto adv = rl::compute_advantages(batch, ppo.gamma, ppo.lambda);
      rl::UpdateRecord u{update++, learner.update(batch, adv)};
      result.updates.push_back(u);
      if (callbacks.on_update) callbacks.on_update(records, u, learner);
    }
    episode += count;
  }
  result.params = learner.params();
  result.optimizer = learner.optimizer();
  return result;
}

}  // namespace fingen::marl
