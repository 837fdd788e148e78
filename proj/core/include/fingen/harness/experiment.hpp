#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fingen/geometry/geometry_io.hpp"
#include "fingen/harness/pareto.hpp"
#include "fingen/marl/mappo.hpp"
#include "fingen/rl/fin_env.hpp"
#include "fingen/rl/ppo.hpp"
#include "fingen/surrogate/dataset.hpp"
#include "fingen/surrogate/model.hpp"

namespace fingen::harness {

enum class Mode { dataset, surrogate_train, single, marl, evaluate };
enum class Backend { simulator, surrogate };

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);  // throws ConfigError

struct ExperimentConfig {
  Mode mode = Mode::single;
  Backend backend = Backend::simulator;
  std::uint64_t seed = 1;  // copied into every seeded sub-config
  std::string layout = "single";
  sim::FlowConditions conditions;
  sim::SolverConfig solver;
  int resolution = sim::kDefaultResolution;  // simulator backend
  rl::FinEnvConfig env;
  rl::PpoConfig ppo;
  marl::MappoConfig mappo;
  surrogate::DatasetConfig dataset;
  surrogate::SurrogateTrainConfig surrogate;
  std::string surrogate_model;  // checkpoint path, surrogate backend
  std::string corpus;           // corpus directory, surrogate training
  std::string design;           // design file, evaluate mode
  int checkpoint_every = 10;    // updates between latest.json snapshots
  int ranking_samples = 50;     // held-out designs for the ranking check
};

nlohmann::json to_json(const ExperimentConfig& config);
// Missing keys keep defaults. Throws ConfigError on bad values, unknown
// top-level keys or referenced files that do not exist.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);

// The FINGEN_OUTPUT_ROOT environment variable wins over `fallback`.
std::filesystem::path output_root(const std::filesystem::path& fallback);

// Creates dir, dir/checkpoints and dir/designs; removes a stale summary.json.
void prepare_run_directory(const std::filesystem::path& dir);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);  // throws ParseError
void write_text(const std::filesystem::path& path, const std::string& text);

// Evaluator for the configured backend.
std::shared_ptr<const rl::Evaluator> make_evaluator(const ExperimentConfig& config);

struct DesignReport {
  rl::Evaluation design;
  rl::Evaluation reference;
  double q_ratio = 0.0;
  double dp_ratio = 0.0;
  double reward_ratio = 0.0;
};

// Evaluates the design and its layout's reference rectangles with the same
// backend.
DesignReport evaluate_design(const geometry::DesignSpace& space, const rl::Evaluator& evaluator);
nlohmann::json to_json(const DesignReport& report);

struct RenderOptions {
  bool field = false;  // simulate and underlay the final temperature
  int resolution = sim::kDefaultResolution;
  sim::FlowConditions conditions;
  sim::SolverConfig solver;
};

struct RenderOutput {
  std::string svg;
  std::optional<geometry::ScalarImage> field;  // (T - T_in) / (T_s - T_in)
};

RenderOutput render_design(const geometry::DesignSpace& space, const RenderOptions& options);
// Grayscale PGM of a scalar image (row 0 at the bottom of the domain).
std::string encode_scalar_pgm(const geometry::ScalarImage& image);

// Pareto records from a training run directory (designs/evaluated.csv plus
// the reference stored in summary.json).
std::vector<ParetoRecord> load_pareto_records(const std::filesystem::path& run_dir);

using Logger = std::function<void(const std::string&)>;

// Executes the configured mode inside `dir`: config.json, log.csv,
// checkpoints/, designs/, summary.json (deterministic) and timing.json (wall
// time). A failure after the run started leaves the partial artifacts, writes
// a summary with status "failed" and rethrows.
nlohmann::json run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir,
                              const Logger& log = {});

// Pareto export over several run directories into `dir`.
nlohmann::json run_pareto(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& dir);

}  // namespace fingen::harness
