#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <regex>
#include <sstream>

#include "fingen/errors.hpp"
#include "fingen/harness/experiment.hpp"
#include "support/fake_evaluator.hpp"

using namespace fingen;
using namespace fingen::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ParetoRecord rec(double q, double dp) { return {"d", q, dp, 0.0, 0}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fingen_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("Pareto front examples") {
  const std::vector<ParetoRecord> r{rec(1.2, 0.8), rec(1.1, 0.9), rec(1.3, 1.5)};
  CHECK(pareto_front(r) == std::vector<std::size_t>{0, 2});
  CHECK(pareto_front({rec(1.0, 1.0)}) == std::vector<std::size_t>{0});
  CHECK(pareto_front({rec(1.2, 0.8), rec(1.2, 0.8), rec(1.0, 0.5)}) == std::vector<std::size_t>{2, 0});
  CHECK_THROWS_AS(pareto_front({}), InputError);
}

TEST_CASE("Pareto front matches brute-force dominance on random ties") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> grid(0, 9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ParetoRecord> r;
    for (int k = 0; k < 60; ++k) r.push_back(rec(0.5 + 0.1 * grid(rng), 0.5 + 0.1 * grid(rng)));
    const auto front = pareto_front(r);
    std::set<std::pair<double, double>> expected;
    for (const auto& a : r) {
      bool dominated = false;
      for (const auto& b : r) {
        dominated = dominated || (b.q_ratio >= a.q_ratio && b.dp_ratio <= a.dp_ratio &&
                                  (b.q_ratio > a.q_ratio || b.dp_ratio < a.dp_ratio));
      }
      if (!dominated) expected.insert({a.q_ratio, a.dp_ratio});
    }
    std::set<std::pair<double, double>> got;
    for (auto i : front) got.insert({r[i].q_ratio, r[i].dp_ratio});
    CHECK(got == expected);
    CHECK(front.size() == expected.size());  // no duplicates
  }
}

TEST_CASE("Pareto CSV and SVG") {
  const std::vector<ParetoRecord> r{rec(1.2, 0.8), rec(1.1, 0.9), rec(1.3, 1.5)};
  const auto front = pareto_front(r);
  const auto csv = pareto_csv(r, front);
  CHECK(csv.find("design,episode,q_ratio,dp_ratio,reward,on_front\n") == 0);
  CHECK(csv.find("d,0,1.1,0.9,0,0") != std::string::npos);
  const auto svg = pareto_svg(r, front);
  const std::regex dot("r=\"3.5\"");
  CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), dot), std::sregex_iterator()) == 2);
}

TEST_CASE("experiment config round trip and validation") {
  auto c = experiment_config_from_json({{"mode", "marl"}, {"seed", 7}, {"layout", "staggered"},
                                        {"conditions", {{"reynolds", 10.0}, {"prandtl", 0.7}}},
                                        {"mappo", {{"episodes", 100}}}});
  CHECK(c.mode == Mode::marl);
  CHECK(c.mappo.ppo.seed == 7);
  CHECK(c.ppo.seed == 7);
  CHECK(c.dataset.conditions.reynolds == 10.0);
  CHECK(c.dataset.layout == "staggered");
  CHECK(c.mappo.ppo.episodes == 100);
  CHECK(c.mappo.ppo.batch_size == 50);
  const auto again = experiment_config_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));

  CHECK_THROWS_AS(experiment_config_from_json({{"mdoe", "single"}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json({{"mode", "fly"}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json({{"mode", "evaluate"}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json({{"mode", "evaluate"}, {"design", "/no/such/file.json"}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json({{"backend", "surrogate"}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json({{"conditions", {{"reynolds", -1.0}}}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json({{"ppo", {{"clip", 2.0}}}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json({{"env", {{"horizon", 0}}}}), ConfigError);
}

TEST_CASE("output root environment override") {
  ::unsetenv("FINGEN_OUTPUT_ROOT");
  CHECK(output_root("runs") == fs::path("runs"));
  ::setenv("FINGEN_OUTPUT_ROOT", "/tmp/elsewhere", 1);
  CHECK(output_root("runs") == fs::path("/tmp/elsewhere"));
  ::unsetenv("FINGEN_OUTPUT_ROOT");
}

TEST_CASE("reference evaluated against itself has unit ratios") {
  testing::AreaEvaluator eval;
  const auto ref = geometry::reference_layout(geometry::staggered_layout());
  const auto r = evaluate_design(ref, eval);
  CHECK(r.q_ratio == doctest::Approx(1.0));
  CHECK(r.dp_ratio == doctest::Approx(1.0));
  CHECK(r.reward_ratio == doctest::Approx(1.0));
  auto bad = ref;
  bad.shapes[1] = bad.shapes[0];
  CHECK(evaluate_design(bad, eval).design.failed);
}

TEST_CASE("render: one path per shape, every vertex inside its box") {
  const auto one = render_design(geometry::reference_layout(geometry::single_fin_layout()), {});
  const std::regex path_re("<path class=\"shape\" d=\"([^\"]*)\"");
  auto paths = [&](const std::string& svg) {
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), path_re); it != std::sregex_iterator(); ++it) {
      out.push_back((*it)[1]);
    }
    return out;
  };
  CHECK(paths(one.svg).size() == 1);
  CHECK(paths(one.svg)[0].back() == 'Z');

  const auto layout = geometry::staggered_layout();
  const auto five = render_design(layout, {});
  const auto d = paths(five.svg);
  REQUIRE(d.size() == 5);
  const double s = geometry::SvgOptions{}.pixels_per_unit;
  const double h = layout.height * s;
  const std::regex pt("(-?[0-9.]+),(-?[0-9.]+)");
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& box = layout.boxes[k];
    int n = 0;
    for (auto it = std::sregex_iterator(d[k].begin(), d[k].end(), pt); it != std::sregex_iterator(); ++it, ++n) {
      const double x = std::stod((*it)[1]) / s;
      const double y = (h - std::stod((*it)[2])) / s;
      CHECK(box.contains({x, y}, 2e-3));
    }
    CHECK(n > 4);
  }
}

TEST_CASE("render with field underlay matches the grid aspect ratio") {
  RenderOptions opts;
  opts.field = true;
  opts.resolution = 32;
  opts.conditions.reynolds = 10.0;
  opts.conditions.prandtl = 0.7;
  auto layout = geometry::staggered_layout(0.5);
  const auto out = render_design(layout, opts);
  REQUIRE(out.field);
  CHECK(out.field->nx == 32);
  CHECK(out.field->ny == 16);
  for (double v : out.field->values) {
    CHECK(v >= -1e-9);
    CHECK(v <= 1.0 + 1e-9);
  }
  const auto pgm = encode_scalar_pgm(*out.field);
  CHECK(pgm.rfind("P5\n32 16\n255\n", 0) == 0);
  CHECK(out.svg.find("id=\"field\"") != std::string::npos);
}

TEST_CASE("training runs are reproducible byte for byte and follow the directory contract") {
  const json doc{{"mode", "single"},
                 {"seed", 3},
                 {"layout", "single"},
                 {"resolution", 32},
                 {"conditions", {{"reynolds", 10.0}, {"prandtl", 0.7}}},
                 {"ppo", {{"episodes", 4}, {"batch_size", 2}, {"actor_hidden", {16}}, {"critic_hidden", {16}}}},
                 {"checkpoint_every", 1}};
  const auto config = experiment_config_from_json(doc);
  const auto a = scratch("run_a");
  const auto b = scratch("run_b");
  run_experiment(config, a);
  run_experiment(config, b);
  for (const char* f : {"config.json", "log.csv", "summary.json", "updates.csv", "designs/evaluated.csv",
                        "designs/best.json", "checkpoints/policy.json", "checkpoints/latest.json", "timing.json"}) {
    CHECK_MESSAGE(fs::exists(a / f), f);
  }
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "log.csv") == slurp(b / "log.csv"));
  const auto summary = read_json(a / "summary.json");
  CHECK(summary.at("episodes") == 4);
  // Ratios are recomputable from the stored raw values.
  const auto& best = summary.at("best");
  CHECK(best.at("q_ratio").get<double>() ==
        doctest::Approx(best.at("Q").get<double>() / summary.at("reference").at("Q").get<double>()));
  CHECK(best.at("dp_ratio").get<double>() ==
        doctest::Approx(best.at("Dp").get<double>() / summary.at("reference").at("Dp").get<double>()));

  const auto records = load_pareto_records(a);
  CHECK(records.size() == 4);
  const auto p = scratch("pareto");
  const auto ps = run_pareto({a, b}, p);
  CHECK(ps.at("records") == 8);
  CHECK(fs::exists(p / "pareto.csv"));
  CHECK(fs::exists(p / "pareto.svg"));
  for (const auto& dir : {a, b, p}) fs::remove_all(dir);
}

TEST_CASE("a failing run leaves a failed summary") {
  const auto dir = scratch("fail");
  const auto corpus_dir = scratch("fail_corpus");
  surrogate::Corpus empty;
  empty.provenance = {{"format", "fingen-corpus"}};
  surrogate::save_corpus(corpus_dir, empty);
  const auto config = experiment_config_from_json({{"mode", "surrogate-train"}, {"corpus", corpus_dir.string()}});
  CHECK_THROWS_AS(run_experiment(config, dir), InputError);
  const auto summary = read_json(dir / "summary.json");
  CHECK(summary.at("status") == "failed");
  CHECK(summary.at("error").get<std::string>().find("at least 100") != std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(corpus_dir);
}
