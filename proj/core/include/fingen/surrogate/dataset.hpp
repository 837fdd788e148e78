#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fingen/geometry/design_space.hpp"
#include "fingen/geometry/raster.hpp"
#include "fingen/sim/flow.hpp"

namespace fingen::surrogate {

enum class SamplerKind {
  perturb,  // initial shape plus uniform displacements up to `perturbation` x box side
  uniform,  // free points uniform in the box, ordered by angle around its center
};

struct DatasetConfig {
  std::string layout = "staggered";
  SamplerKind sampler = SamplerKind::perturb;
  double perturbation = 0.1;
  int count = 2000;
  std::uint64_t seed = 1;
  int resolution = 32;   // simulator cells per unit length
  int raster_side = 64;  // stored image is raster_side x raster_side over the domain
  double validation_fraction = 0.1;
  int max_attempts = 1000;  // per sample
  int workers = 0;
  sim::FlowConditions conditions;
  sim::SolverConfig solver;
};

nlohmann::json to_json(const DatasetConfig& config);
DatasetConfig dataset_config_from_json(const nlohmann::json& doc, DatasetConfig defaults = {});  // throws ConfigError

struct LabeledSample {
  int id = 0;
  std::uint64_t seed = 0;  // stream the geometry was drawn from
  bool validation = false;
  int attempts = 1;
  geometry::DesignSpace design;
  geometry::Raster raster;
  double heat_transfer = 0.0;
  double pressure_drop = 0.0;
  double reward = 0.0;
};

struct Corpus {
  // Generator config, solver hash, reference evaluation and counts.
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<LabeledSample> samples;

  std::vector<const LabeledSample*> split(bool validation) const;
  // Throws InputError when a geometry seed appears in both splits.
  void check_disjoint() const;
};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
// Hash of everything that determines the labels for a fixed geometry.
std::string solver_hash(const sim::FlowConditions& conditions, const sim::SolverConfig& solver, int resolution);
// Hash of the labels and rasters, in sample order.
std::string corpus_hash(const Corpus& corpus);

// One candidate geometry (not yet validated).
geometry::DesignSpace sample_design(const geometry::DesignSpace& layout, const DatasetConfig& config,
                                    std::mt19937_64& rng);

// Draws `count` validated, simulated samples. Sample i depends only on
// (seed, i), so the corpus is independent of the worker count. Throws
// GenerationError when more than 99% of candidates are rejected.
Corpus generate_dataset(const DatasetConfig& config,
                        const std::function<void(int done, int total)>& progress = {});

// <dir>/labels.jsonl (provenance header line, then one line per sample) and
// <dir>/images/<id>.pgm.
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& dir);  // throws ParseError

}  // namespace fingen::surrogate
