#include <doctest.h>

#include <filesystem>
#include <random>

#include "fingen/errors.hpp"
#include "fingen/surrogate/model.hpp"

using namespace fingen;
using namespace fingen::surrogate;

namespace {

DatasetConfig tiny_config() {
  DatasetConfig c;
  c.layout = "staggered";
  c.count = 6;
  c.seed = 21;
  c.resolution = 32;
  c.raster_side = 32;
  c.validation_fraction = 1.0 / 3.0;
  c.workers = 1;
  c.conditions.reynolds = 10.0;
  c.conditions.prandtl = 0.7;
  return c;
}

const Corpus& tiny_corpus() {
  static const Corpus corpus = generate_dataset(tiny_config());
  return corpus;
}

// Random blobs with labels that are a smooth function of the solid fraction.
Corpus synthetic_corpus(int n, int side, std::uint64_t seed, bool constant_labels, int validation = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pos(2, side - 3);
  Corpus c;
  for (int i = 0; i < n; ++i) {
    LabeledSample s;
    s.id = i;
    s.seed = static_cast<std::uint64_t>(i);
    s.validation = i < validation;
    s.raster = {side, side, std::vector<std::uint8_t>(static_cast<std::size_t>(side) * side, 0)};
    const int x0 = pos(rng);
    const int y0 = pos(rng);
    const int x1 = std::min(side - 1, x0 + pos(rng) / 2);
    const int y1 = std::min(side - 1, y0 + pos(rng) / 2);
    for (int j = y0; j <= y1; ++j)
      for (int k = x0; k <= x1; ++k) s.raster.pixels[static_cast<std::size_t>(j) * side + k] = 1;
    const double f = static_cast<double>(s.raster.count_solid()) / (side * side);
    s.heat_transfer = constant_labels ? 0.8 : 0.5 + f;
    s.pressure_drop = constant_labels ? 2.0 : 1.0 + 10.0 * f * f;
    s.reward = sim::reward_from(s.heat_transfer, s.pressure_drop);
    c.samples.push_back(std::move(s));
  }
  return c;
}

}  // namespace

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("label normalization round trip") {
  const auto c = synthetic_corpus(20, 16, 1, false);
  const auto n = LabelNormalization::fit(c.split(false));
  for (const auto& s : c.samples) {
    const auto z = n.normalize(s.heat_transfer, s.pressure_drop);
    const auto back = n.denormalize(z[0], z[1]);
    CHECK(std::abs(back[0] - s.heat_transfer) < 1e-12);
    CHECK(std::abs(back[1] - s.pressure_drop) < 1e-12 * s.pressure_drop);
  }
  const auto flat = LabelNormalization::fit(synthetic_corpus(5, 16, 1, true).split(false));
  CHECK(flat.q_std == doctest::Approx(1e-3));
  CHECK(flat.q_mean == doctest::Approx(0.8));
}

TEST_CASE("generated corpus: valid geometry, exact split, provenance") {
  const auto& c = tiny_corpus();
  REQUIRE(c.samples.size() == 6);
  CHECK(c.split(true).size() == 2);
  CHECK(c.split(false).size() == 4);
  CHECK_NOTHROW(c.check_disjoint());
  for (const auto& s : c.samples) {
    CHECK(geometry::validate_geometry(s.design).ok());
    CHECK(s.raster.width == 32);
    CHECK(std::isfinite(s.heat_transfer));
    CHECK(s.pressure_drop > 0.0);
  }
  CHECK(c.provenance.at("solver_hash") == solver_hash(tiny_config().conditions, tiny_config().solver, 32));
  CHECK(c.provenance.at("corpus_hash") == corpus_hash(c));
  CHECK(c.provenance.at("reference").at("reward").get<double>() > 0.0);
}

TEST_CASE("obstacles raise the pressure drop above the empty channel") {
  geometry::DesignSpace empty;
  const auto cfg = tiny_config();
  const auto r = sim::run_simulation(empty, cfg.conditions, cfg.resolution, cfg.solver);
  REQUIRE_FALSE(r.diverged);
  for (const auto& s : tiny_corpus().samples) CHECK(s.pressure_drop > r.pressure_drop);
}

TEST_CASE("generation is reproducible and independent of the worker count") {
  auto cfg = tiny_config();
  cfg.count = 3;
  const auto a = generate_dataset(cfg);
  cfg.workers = 2;
  const auto b = generate_dataset(cfg);
  CHECK(corpus_hash(a) == corpus_hash(b));
  // Same seed: the first samples match the larger corpus.
  for (int i = 0; i < 3; ++i) CHECK(a.samples[i].reward == tiny_corpus().samples[i].reward);
}

TEST_CASE("degenerate sampler is a generation error") {
  auto cfg = tiny_config();
  cfg.perturbation = 1.0;
  cfg.max_attempts = 30;
  cfg.count = 1;
  CHECK_THROWS_AS(generate_dataset(cfg), GenerationError);
}

TEST_CASE("uniform sampler keeps points inside boxes") {
  auto cfg = tiny_config();
  cfg.sampler = SamplerKind::uniform;
  const auto layout = geometry::named_layout("staggered");
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto d = sample_design(layout, cfg, rng);
    for (std::size_t s = 0; s < d.shapes.size(); ++s)
      for (const auto& p : d.shapes[s].free_points()) CHECK(d.boxes[s].contains(p, 1e-12));
  }
}

TEST_CASE("corpus save and load round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "fingen_corpus_test";
  std::filesystem::remove_all(dir);
  save_corpus(dir, tiny_corpus());
  const auto back = load_corpus(dir);
  CHECK(corpus_hash(back) == corpus_hash(tiny_corpus()));
  CHECK(back.provenance == tiny_corpus().provenance);
  CHECK(back.samples[1].design.shapes.size() == 5);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_corpus(dir), ParseError);
}

TEST_CASE("overlapping splits are rejected") {
  auto c = synthetic_corpus(4, 16, 2, false, 1);
  c.samples[2].seed = c.samples[0].seed;
  CHECK_THROWS_AS(c.check_disjoint(), InputError);
}

TEST_CASE("default surrogate network shape") {
  const auto spec = default_surrogate_spec(64);
  CHECK(spec.output_shape() == std::vector<int>{2});
  CHECK(spec.shapes()[spec.shapes().size() - 5] == std::vector<int>{32, 4, 4});
}

TEST_CASE("surrogate overfits ten samples") {
  const auto c = synthetic_corpus(10, 16, 3, false);
  SurrogateTrainConfig cfg;
  cfg.min_samples = 10;
  cfg.epochs = 600;
  cfg.batch_size = 10;
  cfg.patience = 600;
  const auto r = train_surrogate(c, cfg);
  CHECK(r.report.train_error.heat_transfer < 0.01);
  CHECK(r.report.train_error.pressure_drop < 0.01);
}

TEST_CASE("constant labels are learned exactly") {
  const auto c = synthetic_corpus(12, 16, 4, true, 4);
  SurrogateTrainConfig cfg;
  cfg.min_samples = 10;
  cfg.epochs = 200;
  cfg.batch_size = 8;
  const auto r = train_surrogate(c, cfg);
  CHECK(r.report.validation_error.heat_transfer < 1e-3);
  CHECK(r.report.validation_error.pressure_drop < 1e-3);
}

TEST_CASE("training preconditions and failures") {
  const auto c = synthetic_corpus(12, 16, 5, false);
  CHECK_THROWS_AS(train_surrogate(c, SurrogateTrainConfig{}), InputError);
  SurrogateTrainConfig cfg;
  cfg.min_samples = 10;
  cfg.learning_rate = 1e300;
  cfg.epochs = 5;
  CHECK_THROWS_AS(train_surrogate(c, cfg), TrainingError);
}

TEST_CASE("prediction: deterministic, validated, persistent") {
  const auto c = synthetic_corpus(12, 32, 6, false);
  SurrogateTrainConfig cfg;
  cfg.min_samples = 10;
  cfg.epochs = 2;
  auto model = std::make_shared<SurrogateModel>(train_surrogate(c, cfg).model);
  const auto space = geometry::named_layout("staggered");
  const auto a = predict(*model, space);
  const auto b = predict(*model, space);
  CHECK(a.reward == b.reward);
  CHECK(a.reward == doctest::Approx(sim::reward_from(a.heat_transfer, a.pressure_drop)).epsilon(1e-12));

  auto bad = space;
  bad.shapes[1] = bad.shapes[0];
  CHECK_THROWS_AS(predict(*model, bad), PreconditionError);
  SurrogateBackend backend(model);
  CHECK(backend.evaluate(bad).failed);
  CHECK_FALSE(backend.evaluate(space).failed);

  // A sliver thinner than one label cell is outside what the corpus covers.
  const auto& box = space.boxes[0];
  const double cx = 0.5 * (box.x_min + box.x_max);
  const double cy = 0.5 * (box.y_min + box.y_max);
  auto sliver = space;
  sliver.shapes[0] = geometry::CompositeBezier::build({{{cx - 0.05, cy - 0.005}, {cx + 0.05, cy - 0.005}},
                                                      {{cx + 0.05, cy - 0.005}, {cx + 0.05, cy + 0.005}},
                                                      {{cx + 0.05, cy + 0.005}, {cx - 0.05, cy + 0.005}},
                                                      {{cx - 0.05, cy + 0.005}, {cx - 0.05, cy - 0.005}}});
  CHECK_FALSE(backend.evaluate(sliver).failed);
  auto guarded = std::make_shared<SurrogateModel>(*model);
  guarded->label_resolution = 32;
  CHECK(SurrogateBackend(guarded).evaluate(sliver).failed);
  CHECK_FALSE(SurrogateBackend(guarded).evaluate(space).failed);

  const auto path = std::filesystem::temp_directory_path() / "fingen_surrogate_test.json";
  save_model(path, *model);
  const auto loaded = load_model(path);
  CHECK(predict(loaded, space).reward == a.reward);
  CHECK(loaded.label_resolution == model->label_resolution);
  std::filesystem::remove(path);

  geometry::Raster wrong{16, 16, std::vector<std::uint8_t>(256, 0)};
  CHECK_THROWS_AS(predict_rasters(*model, {&wrong}), ShapeError);
}
