#include <doctest.h>

#include <random>

#include "fingen/errors.hpp"
#include "fingen/geometry/geometry_io.hpp"
#include "fingen/marl/mappo.hpp"
#include "fingen/rl/toy_env.hpp"
#include "support/fake_evaluator.hpp"
#include "support/gradcheck.hpp"

using namespace fingen;
using namespace fingen::marl;

namespace {

MappoConfig small_config(std::uint64_t seed) {
  MappoConfig c;
  c.ppo.actor_hidden = {32, 32};
  c.ppo.critic_hidden = {32, 32};
  c.ppo.learning_rate = 1e-3;
  c.ppo.loss.entropy = 0.0;
  c.ppo.batch_size = 16;
  c.ppo.seed = seed;
  return c;
}

double mean_reward(const rl::TrainResult& r, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += r.episodes[i].reward;
  return s / static_cast<double>(to - from);
}

}  // namespace

TEST_CASE("one agent without the index feature reproduces single-agent PPO exactly") {
  auto toy = std::make_shared<rl::QuadraticToy>(std::vector<double>{0.4, -0.1});
  SingleAgentAdapter adapted(toy);
  auto c = small_config(5);
  c.agent_index = false;
  c.ppo.episodes = 64;
  const auto multi = mappo_train(adapted, c);
  const auto single = rl::train(*toy, c.ppo);
  REQUIRE(multi.episodes.size() == single.episodes.size());
  for (std::size_t i = 0; i < multi.episodes.size(); ++i) CHECK(multi.episodes[i].reward == single.episodes[i].reward);
  CHECK(multi.params.values == single.params.values);
}

TEST_CASE("shared actor: identical inputs and RNG streams give identical actions") {
  SeparableStub stub({{0.1, 0.2}, {0.3, -0.4}});
  const auto c = small_config(1);
  const auto model = make_shared_policy(stub, c);
  std::mt19937_64 init(3);
  const auto p = model.initial(init, std::log(0.5));
  const auto in = agent_input({1.0, 1.0}, 0, 2, true);
  std::mt19937_64 r1(42);
  std::mt19937_64 r2(42);
  const auto a = decentralized_act(model, p, {in}, r1);
  const auto b = decentralized_act(model, p, {in}, r2);
  CHECK(a.agents[0].action == b.agents[0].action);
  CHECK(agent_input({0.5}, 1, 3, true) == std::vector<double>{0.5, 0.0, 1.0, 0.0});
}

TEST_CASE("centralized critic: determinism, no symmetry, shape errors, gradient") {
  SeparableStub stub({{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
  const auto c = small_config(2);
  const auto model = make_shared_policy(stub, c);
  std::mt19937_64 init(4);
  const auto p = model.initial(init, std::log(0.5));
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const std::vector<double> swapped{0.3, 0.4, 0.1, 0.2, 0.5, 0.6};
  CHECK(centralized_value(model, p, s) == centralized_value(model, p, s));
  CHECK(centralized_value(model, p, s) != centralized_value(model, p, swapped));
  CHECK_THROWS_AS(centralized_value(model, p, {0.1, 0.2}), ShapeError);
  const auto check = testing::check_network(nn::NetworkSpec::mlp(6, {8, 8}, 1), 3, 17);
  CHECK(check.params < 1e-4);
}

TEST_CASE("team reward is shared and the critic sees the global state") {
  SeparableStub stub({{0.1, 0.2}, {0.3, -0.4}, {-0.5, 0.5}});
  const auto c = small_config(3);
  const auto model = make_shared_policy(stub, c);
  std::mt19937_64 init(5);
  const auto p = model.initial(init, std::log(0.5));
  const auto roll = run_joint_episode(stub, model, p, c, 0);
  REQUIRE(roll.per_agent.size() == 3);
  for (const auto& steps : roll.per_agent) {
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].reward == roll.per_agent[0][0].reward);
    CHECK(steps[0].critic_input.size() == 6u);
    CHECK(steps[0].observation.size() == 5u);
  }
}

TEST_CASE("five fin agents stay in their boxes over 100 seeded joint actions") {
  auto eval = std::make_shared<testing::AreaEvaluator>();
  int valid = 0;
  int invalid = 0;
  struct Setting {
    double log_std, fraction;
    int horizon;
  };
  for (const auto& [log_std, fraction, horizon] : {Setting{std::log(0.5), 0.05, 1}, Setting{std::log(2.0), 0.3, 3}}) {
    rl::FinEnvConfig fc;
    fc.action_fraction = fraction;
    fc.horizon = horizon;
    fc.failure_penalty = -1.0;
    MultiFinEnvironment env(geometry::staggered_layout(), eval, fc);
    CHECK(env.agents() == 5);
    auto c = small_config(9);
    const auto model = make_shared_policy(env, c);
    std::mt19937_64 init(6);
    const auto p = model.initial(init, log_std);
    for (long e = 0; e < 50; ++e) {
      const auto roll = run_joint_episode(env, model, p, c, e);
      const auto space = geometry::design_space_from_json(roll.artifact.at("design"));
      for (std::size_t s = 0; s < space.shapes.size(); ++s) {
        for (const auto& pt : space.shapes[s].free_points()) CHECK(space.boxes[s].contains(pt, 1e-12));
      }
      if (geometry::validate_geometry(space).ok()) {
        ++valid;
        CHECK_FALSE(roll.record.failed);
        CHECK(roll.record.reward == doctest::Approx(eval->evaluate(space).reward).epsilon(1e-12));
      } else {
        ++invalid;
        CHECK(roll.record.failed);
        CHECK(roll.record.reward == fc.failure_penalty);
      }
    }
  }
  CHECK(valid > 0);
  CHECK(invalid > 0);
}

TEST_CASE("MAPPO improves the team reward on the separable stub") {
  SeparableStub stub({{0.3, -0.2}, {-0.4, 0.1}, {0.0, 0.5}});
  auto c = small_config(11);
  c.ppo.episodes = 16 * 60;
  const auto r = mappo_train(stub, c);
  CHECK(mean_reward(r, r.episodes.size() - 100, r.episodes.size()) > mean_reward(r, 0, 100));
}

TEST_CASE("a single unfrozen agent still improves its own contribution") {
  SeparableStub stub({{0.3, -0.2}, {-0.4, 0.1}, {0.0, 0.5}});
  auto c = small_config(12);
  c.frozen_agents = {0, 2};
  c.ppo.episodes = 16 * 60;
  const auto r = mappo_train(stub, c);
  auto contribution = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += r.episodes[i].info.at("agent1");
    return s / static_cast<double>(to - from);
  };
  CHECK(contribution(r.episodes.size() - 100, r.episodes.size()) > contribution(0, 100));
  // Frozen agents never move.
  for (const auto& e : r.episodes) CHECK(e.info.at("agent0_action_norm") == 0.0);
}

TEST_CASE("MAPPO config parsing") {
  const auto c = mappo_config_from_json(nlohmann::json{{"agent_index", false}, {"epochs", 2}});
  CHECK_FALSE(c.agent_index);
  CHECK(c.ppo.epochs == 2);
  CHECK(c.ppo.actor_hidden == std::vector<int>{512, 512, 512});
  CHECK(c.ppo.batch_size == 50);
}
