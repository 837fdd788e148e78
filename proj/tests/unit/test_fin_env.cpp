#include <doctest.h>

#include "fingen/errors.hpp"
#include "fingen/geometry/geometry_io.hpp"
#include "fingen/rl/fin_env.hpp"
#include "support/fake_evaluator.hpp"

using namespace fingen;

TEST_CASE("fin environment sizes, bounds and reference") {
  auto eval = std::make_shared<testing::AreaEvaluator>();
  const auto layout = geometry::single_fin_layout();
  rl::FinEnvironment env(layout, eval);
  const auto dof = static_cast<int>(layout.shapes[0].dof());
  CHECK(env.observation_size() == dof);
  CHECK(env.action_size() == dof);
  const auto& box = layout.boxes[0];
  const auto bound = env.action_bound();
  CHECK(bound[0] == doctest::Approx(0.1 * box.width()));
  CHECK(bound[1] == doctest::Approx(0.1 * box.height()));
  CHECK(env.reference_reward() == doctest::Approx(eval->evaluate(geometry::reference_layout(layout)).reward));

  rl::FinEnvironment five(geometry::staggered_layout(), eval);
  CHECK(five.action_size() == 5 * dof);
}

TEST_CASE("zero action scores the initial design; observation is normalized") {
  auto eval = std::make_shared<testing::AreaEvaluator>();
  const auto layout = geometry::single_fin_layout();
  rl::FinEnvironment env(layout, eval);
  auto ep = env.start(1);
  for (double x : ep->observation()) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
  const std::vector<double> zero(static_cast<std::size_t>(env.action_size()), 0.0);
  const auto out = ep->step(zero);
  CHECK(out.done);
  CHECK_FALSE(out.failed);
  CHECK(out.reward == doctest::Approx(eval->evaluate(layout).reward).epsilon(1e-12));
  const auto art = ep->artifact();
  CHECK(art.at("Q").get<double>() == doctest::Approx(eval->evaluate(layout).heat_transfer));
  CHECK(geometry::design_space_from_json(art.at("design")).shapes.size() == 1);
}

TEST_CASE("multi-step episodes reward only the final design") {
  auto eval = std::make_shared<testing::AreaEvaluator>();
  rl::FinEnvConfig fc;
  fc.horizon = 3;
  rl::FinEnvironment env(geometry::single_fin_layout(), eval, fc);
  auto ep = env.start(1);
  const std::vector<double> a(static_cast<std::size_t>(env.action_size()), 0.001);
  for (int k = 0; k < 2; ++k) {
    const auto out = ep->step(a);
    CHECK_FALSE(out.done);
    CHECK(out.reward == 0.0);
  }
  const auto last = ep->step(a);
  CHECK(last.done);
  CHECK(last.reward > 0.0);
}

TEST_CASE("invalid designs get the penalty without evaluation") {
  auto eval = std::make_shared<testing::AreaEvaluator>();
  rl::FinEnvConfig fc;
  fc.action_fraction = 1.0;
  fc.failure_penalty = -2.0;
  rl::FinEnvironment env(geometry::single_fin_layout(), eval, fc);
  auto ep = env.start(1);
  // Alternate corners: collapses the loop onto itself.
  std::vector<double> a(static_cast<std::size_t>(env.action_size()));
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = (k / 2 % 2 == 0 ? 1.0 : -1.0) * env.action_bound()[k];
  const auto out = ep->step(a);
  CHECK(out.failed);
  CHECK(out.reward == -2.0);
  CHECK_FALSE(out.failure.empty());
}

TEST_CASE("fin environment preconditions") {
  auto eval = std::make_shared<testing::AreaEvaluator>();
  CHECK_THROWS_AS(rl::FinEnvironment(geometry::single_fin_layout(), nullptr), InputError);
  rl::FinEnvConfig fc;
  fc.horizon = 0;
  CHECK_THROWS_AS(rl::FinEnvironment(geometry::single_fin_layout(), eval, fc), InputError);
}
