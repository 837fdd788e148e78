#include "fingen/surrogate/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>

#include "fingen/errors.hpp"
#include "fingen/geometry/geometry_io.hpp"
#include "fingen/rl/parallel.hpp"
#include "fingen/sim/config_io.hpp"

namespace fingen::surrogate {

using nlohmann::json;

namespace {

constexpr int kCorpusVersion = 1;

std::string sampler_name(SamplerKind k) { return k == SamplerKind::perturb ? "perturb" : "uniform"; }

std::string image_name(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "images/%06d.pgm", id);
  return buf;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json to_json(const DatasetConfig& c) {
  return {{"layout", c.layout},
          {"sampler", sampler_name(c.sampler)},
          {"perturbation", c.perturbation},
          {"count", c.count},
          {"seed", c.seed},
          {"resolution", c.resolution},
          {"raster_side", c.raster_side},
          {"validation_fraction", c.validation_fraction},
          {"max_attempts", c.max_attempts},
          {"workers", c.workers},
          {"conditions", sim::to_json(c.conditions)},
          {"solver", sim::to_json(c.solver)}};
}

DatasetConfig dataset_config_from_json(const json& doc, DatasetConfig c) {
  try {
    c.layout = doc.value("layout", c.layout);
    const std::string sampler = doc.value("sampler", sampler_name(c.sampler));
    if (sampler == "perturb") {
      c.sampler = SamplerKind::perturb;
    } else if (sampler == "uniform") {
      c.sampler = SamplerKind::uniform;
    } else {
      throw ConfigError("sampler must be perturb or uniform, got '" + sampler + "'");
    }
    c.perturbation = doc.value("perturbation", c.perturbation);
    c.count = doc.value("count", c.count);
    c.seed = doc.value("seed", c.seed);
    c.resolution = doc.value("resolution", c.resolution);
    c.raster_side = doc.value("raster_side", c.raster_side);
    c.validation_fraction = doc.value("validation_fraction", c.validation_fraction);
    c.max_attempts = doc.value("max_attempts", c.max_attempts);
    c.workers = doc.value("workers", c.workers);
    if (doc.contains("conditions")) c.conditions = sim::flow_conditions_from_json(doc.at("conditions"), c.conditions);
    if (doc.contains("solver")) c.solver = sim::solver_config_from_json(doc.at("solver"), c.solver);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad dataset setting: ") + e.what());
  }
  if (c.count < 1) throw ConfigError("count must be at least 1");
  if (c.resolution < 8 || c.raster_side < 16) throw ConfigError("resolution must be >= 8 and raster_side >= 16");
  if (!(c.perturbation >= 0.0 && c.perturbation <= 1.0)) throw ConfigError("perturbation must lie in [0, 1]");
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  if (c.max_attempts < 1) throw ConfigError("max_attempts must be positive");
  try {
    geometry::named_layout(c.layout);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::vector<const LabeledSample*> Corpus::split(bool validation) const {
  std::vector<const LabeledSample*> out;
  for (const auto& s : samples) {
    if (s.validation == validation) out.push_back(&s);
  }
  return out;
}

void Corpus::check_disjoint() const {
  std::vector<std::uint64_t> train;
  for (const auto* s : split(false)) train.push_back(s->seed);
  std::sort(train.begin(), train.end());
  for (const auto* s : split(true)) {
    if (std::binary_search(train.begin(), train.end(), s->seed)) {
      throw InputError("geometry seed " + std::to_string(s->seed) + " appears in both splits");
    }
  }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string solver_hash(const sim::FlowConditions& conditions, const sim::SolverConfig& solver, int resolution) {
  const json doc{{"conditions", sim::to_json(conditions)}, {"solver", sim::to_json(solver)}, {"resolution", resolution}};
  return hex64(fnv1a(doc.dump()));
}

std::string corpus_hash(const Corpus& corpus) {
  std::uint64_t h = fnv1a("");
  for (const auto& s : corpus.samples) {
    const std::string head = std::to_string(s.id) + " " + std::to_string(s.seed) + " " + (s.validation ? "v" : "t") +
                             " " + exact(s.heat_transfer) + " " + exact(s.pressure_drop) + " " + exact(s.reward) + "\n";
    h = fnv1a(head, h);
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(s.raster.pixels.data()), s.raster.pixels.size()), h);
  }
  return hex64(h);
}

geometry::DesignSpace sample_design(const geometry::DesignSpace& layout, const DatasetConfig& config,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  geometry::DesignSpace space = layout;
  for (std::size_t s = 0; s < space.shapes.size(); ++s) {
    const auto& box = space.boxes[s];
    const auto initial = space.shapes[s].free_points();
    std::vector<geometry::Point> points(initial.size());
    if (config.sampler == SamplerKind::perturb) {
      for (std::size_t k = 0; k < points.size(); ++k) {
        points[k] = box.clamp({initial[k].x + config.perturbation * box.width() * unit(rng),
                               initial[k].y + config.perturbation * box.height() * unit(rng)});
      }
    } else {
      const auto c = box.center();
      for (auto& p : points) p = {c.x + 0.5 * box.width() * unit(rng), c.y + 0.5 * box.height() * unit(rng)};
      auto angle = [&](geometry::Point p) { return std::atan2((p.y - c.y) / box.height(), (p.x - c.x) / box.width()); };
      std::sort(points.begin(), points.end(), [&](auto a, auto b) { return angle(a) < angle(b); });
      // Start the loop at the point nearest in angle to the initial first point.
      const double a0 = angle(initial[0]);
      std::size_t first = 0;
      double best = 1e9;
      for (std::size_t k = 0; k < points.size(); ++k) {
        const double d = std::abs(std::remainder(angle(points[k]) - a0, 2.0 * M_PI));
        if (d < best) {
          best = d;
          first = k;
        }
      }
      std::rotate(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(first), points.end());
    }
    space.shapes[s] = space.shapes[s].with_free_points(points);
  }
  return space;
}

Corpus generate_dataset(const DatasetConfig& config, const std::function<void(int, int)>& progress) {
  const auto layout = geometry::named_layout(config.layout);
  const auto n = static_cast<std::size_t>(config.count);

  // Exact-size validation split from a seeded permutation of sample ids.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(rl::derive_seed(config.seed, 0x5917));
  std::shuffle(order.begin(), order.end(), split_rng);
  std::vector<bool> is_val(n, false);
  const auto n_val = static_cast<std::size_t>(std::lround(config.validation_fraction * static_cast<double>(n)));
  for (std::size_t k = 0; k < n_val; ++k) is_val[static_cast<std::size_t>(order[k])] = true;

  Corpus corpus;
  corpus.samples.resize(n);
  std::atomic<int> done{0};
  std::atomic<bool> exhausted{false};
  std::mutex progress_mutex;
  rl::parallel_for(n, config.workers, [&](std::size_t i) {
    if (exhausted) return;
    LabeledSample& s = corpus.samples[i];
    s.id = static_cast<int>(i);
    s.seed = rl::derive_seed(config.seed, i);
    s.validation = is_val[i];
    std::mt19937_64 rng(s.seed);
    for (s.attempts = 1; s.attempts <= config.max_attempts; ++s.attempts) {
      auto candidate = sample_design(layout, config, rng);
      if (!geometry::validate_geometry(candidate).ok()) continue;
      const auto r = sim::run_simulation(candidate, config.conditions, config.resolution, config.solver);
      if (r.diverged) continue;
      s.design = std::move(candidate);
      s.raster = geometry::rasterize_unchecked(s.design, config.raster_side, config.raster_side);
      s.heat_transfer = r.heat_transfer;
      s.pressure_drop = r.pressure_drop;
      s.reward = r.reward;
      const int d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, config.count);
      }
      return;
    }
    exhausted = true;
  });
  if (exhausted) {
    throw GenerationError("sampler produced no valid geometry in " + std::to_string(config.max_attempts) +
                          " attempts; the configuration is degenerate");
  }
  long attempts = 0;
  for (const auto& s : corpus.samples) attempts += s.attempts;
  const double rejection = 1.0 - static_cast<double>(n) / static_cast<double>(attempts);
  if (rejection > 0.99) {
    throw GenerationError("rejection rate " + std::to_string(rejection) + " exceeds 99%; the configuration is degenerate");
  }

  const auto ref = sim::run_simulation(geometry::reference_layout(layout), config.conditions, config.resolution,
                                       config.solver);
  corpus.provenance = {{"format", "fingen-corpus"},
                       {"version", kCorpusVersion},
                       {"config", to_json(config)},
                       {"solver_hash", solver_hash(config.conditions, config.solver, config.resolution)},
                       {"reference", {{"Q", ref.heat_transfer}, {"Dp", ref.pressure_drop}, {"reward", ref.reward}}},
                       {"samples", n},
                       {"validation_samples", n_val},
                       {"attempts", attempts},
                       {"rejection_rate", rejection},
                       {"corpus_hash", corpus_hash(corpus)}};
  return corpus;
}

void save_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir / "images");
  std::ofstream out(dir / "labels.jsonl");
  if (!out) throw InputError("cannot write " + (dir / "labels.jsonl").string());
  out << corpus.provenance.dump() << "\n";
  for (const auto& s : corpus.samples) {
    const auto image = image_name(s.id);
    geometry::write_pgm(dir / image, s.raster);
    const json line{{"id", s.id},
                    {"seed", s.seed},
                    {"split", s.validation ? "validation" : "train"},
                    {"attempts", s.attempts},
                    {"Q", s.heat_transfer},
                    {"Dp", s.pressure_drop},
                    {"reward", s.reward},
                    {"image", image},
                    {"design", geometry::to_json(s.design)}};
    out << line.dump() << "\n";
  }
}

Corpus load_corpus(const std::filesystem::path& dir) {
  const auto path = dir / "labels.jsonl";
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Corpus corpus;
  std::string line;
  long line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto doc = json::parse(line);
      if (line_no == 1) {
        if (doc.value("format", "") != "fingen-corpus") throw ParseError(path.string() + " is not a corpus label file");
        corpus.provenance = doc;
        continue;
      }
      LabeledSample s;
      s.id = doc.at("id").get<int>();
      s.seed = doc.at("seed").get<std::uint64_t>();
      s.validation = doc.at("split").get<std::string>() == "validation";
      s.attempts = doc.value("attempts", 1);
      s.heat_transfer = doc.at("Q").get<double>();
      s.pressure_drop = doc.at("Dp").get<double>();
      s.reward = doc.at("reward").get<double>();
      s.design = geometry::design_space_from_json(doc.at("design"));
      s.raster = geometry::read_pgm(dir / doc.at("image").get<std::string>());
      corpus.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
  if (corpus.provenance.empty()) throw ParseError(path.string() + " has no provenance header");
  return corpus;
}

}  // namespace fingen::surrogate
