// fingen: dataset generation, surrogate training, PPO/MAPPO shape
// optimization, evaluation, Pareto export and rendering.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fingen/errors.hpp"
#include "fingen/harness/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
  std::string config_file;
  std::string name;
  std::string output_root = "runs";
  bool quiet = false;
  json overrides = json::object();
  std::vector<std::function<void()>> collect;  // copies given flag values into overrides
};

// Registers a flag whose value, when given, is written to overrides[path].
template <typename T>
void flag(CLI::App* app, const std::string& names, const std::string& help, CommonFlags& f,
          std::vector<std::string> path) {
  auto value = std::make_shared<T>();
  auto* opt = app->add_option(names, *value, help);
  f.collect.push_back([&f, opt, value, path] {
    if (opt->count() == 0) return;
    json* node = &f.overrides;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) node = &(*node)[path[k]];
    (*node)[path.back()] = *value;
  });
}

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("-c,--config", f.config_file, "JSON experiment config; its values override flags")
      ->check(CLI::ExistingFile);
  app->add_option("-n,--name", f.name, "Run directory name (default: <verb>-seed<seed>)");
  app->add_option("-o,--output-root", f.output_root, "Root for run directories (FINGEN_OUTPUT_ROOT wins)");
  app->add_flag("-q,--quiet", f.quiet, "Suppress progress output");
  flag<std::uint64_t>(app, "--seed", "Experiment seed", f, {"seed"});
  flag<std::string>(app, "--layout", "single | staggered", f, {"layout"});
  flag<double>(app, "--re", "Reynolds number", f, {"conditions", "reynolds"});
  flag<double>(app, "--pr", "Prandtl number", f, {"conditions", "prandtl"});
}

void add_backend(CLI::App* app, CommonFlags& f) {
  flag<std::string>(app, "--backend", "simulator | surrogate", f, {"backend"});
  flag<std::string>(app, "--model", "Surrogate checkpoint (surrogate backend)", f, {"surrogate_model"});
  flag<int>(app, "--resolution", "Simulator cells per unit length", f, {"resolution"});
}

void add_training(CLI::App* app, CommonFlags& f, const std::string& section) {
  add_backend(app, f);
  flag<int>(app, "--episodes", "Episode budget", f, {section, "episodes"});
  flag<int>(app, "--batch-size", "Episodes per update", f, {section, "batch_size"});
  flag<int>(app, "--workers", "Rollout threads (0 = all cores)", f, {section, "workers"});
  flag<double>(app, "--lr", "Adam step size", f, {section, "learning_rate"});
  flag<double>(app, "--action-fraction", "Maximum displacement per step as a fraction of the box",
               f, {"env", "action_fraction"});
  flag<int>(app, "--horizon", "Steps per episode", f, {"env", "horizon"});
}

fs::path run_directory(const CommonFlags& f, const std::string& verb, std::uint64_t seed) {
  const auto name = f.name.empty() ? verb + "-seed" + std::to_string(seed) : f.name;
  return fingen::harness::output_root(f.output_root) / name;
}

json merged_config(const CommonFlags& f, const std::string& mode) {
  for (const auto& c : f.collect) c();
  json doc = f.overrides;
  doc["mode"] = mode;
  if (!f.config_file.empty()) {
    auto file = fingen::harness::read_json(f.config_file);
    if (!file.is_object()) throw fingen::ConfigError(f.config_file + " must hold a JSON object");
    file.erase("mode");  // the verb decides the mode
    doc.merge_patch(file);
  }
  return doc;
}

fingen::harness::Logger logger(bool quiet) {
  if (quiet) return {};
  return [](const std::string& line) { std::cerr << line << std::endl; };
}

int run_mode(const CommonFlags& f, const std::string& verb, const std::string& mode) {
  const auto config = fingen::harness::experiment_config_from_json(merged_config(f, mode));
  const auto dir = run_directory(f, verb, config.seed);
  if (!f.quiet) std::cerr << "run directory: " << dir.string() << std::endl;
  const auto summary = fingen::harness::run_experiment(config, dir, logger(f.quiet));
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fin shape optimization with PPO, MAPPO and a CNN surrogate"};
  app.require_subcommand(1);

  CommonFlags gen, surr, train, marl, eval, pareto, render;

  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a labeled raster corpus with the simulator");
  add_common(gen_cmd, gen);
  flag<int>(gen_cmd, "--count", "Number of samples", gen, {"dataset", "count"});
  flag<int>(gen_cmd, "--raster-side", "Image side in pixels", gen, {"dataset", "raster_side"});
  flag<int>(gen_cmd, "--data-resolution", "Simulator cells per unit length for labels", gen,
            {"dataset", "resolution"});
  flag<double>(gen_cmd, "--perturbation", "Maximum displacement as a fraction of the box", gen,
               {"dataset", "perturbation"});
  flag<int>(gen_cmd, "--workers", "Simulation threads (0 = all cores)", gen, {"dataset", "workers"});

  auto* surr_cmd = app.add_subcommand("train-surrogate", "Train the CNN surrogate on a corpus");
  add_common(surr_cmd, surr);
  flag<std::string>(surr_cmd, "--corpus", "Corpus directory (gen-data output/corpus)", surr, {"corpus"});
  flag<int>(surr_cmd, "--epochs", "Maximum epochs", surr, {"surrogate", "epochs"});

  auto* train_cmd = app.add_subcommand("train", "Single-agent PPO shape optimization");
  add_common(train_cmd, train);
  add_training(train_cmd, train, "ppo");

  auto* marl_cmd = app.add_subcommand("train-marl", "Multi-agent PPO, one agent per shape");
  add_common(marl_cmd, marl);
  add_training(marl_cmd, marl, "mappo");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a design against its reference rectangles");
  add_common(eval_cmd, eval);
  add_backend(eval_cmd, eval);
  flag<std::string>(eval_cmd, "--design", "Design JSON file", eval, {"design"});

  auto* pareto_cmd = app.add_subcommand("pareto", "Pareto front over the designs of training runs");
  std::vector<std::string> pareto_runs;
  pareto_cmd->add_option("runs", pareto_runs, "Training run directories")->required()->check(CLI::ExistingDirectory);
  pareto_cmd->add_option("-n,--name", pareto.name, "Output directory name (default: pareto)");
  pareto_cmd->add_option("-o,--output-root", pareto.output_root, "Root for run directories");
  pareto_cmd->add_flag("-q,--quiet", pareto.quiet, "Suppress progress output");

  auto* render_cmd = app.add_subcommand("render", "SVG of a design, optionally over its temperature field");
  std::string render_design;
  bool render_field = false;
  render_cmd->add_option("design", render_design, "Design JSON file")->required()->check(CLI::ExistingFile);
  render_cmd->add_flag("--field", render_field, "Simulate and underlay the temperature field");
  add_common(render_cmd, render);
  flag<int>(render_cmd, "--resolution", "Simulator cells per unit length", render, {"resolution"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen_cmd) return run_mode(gen, "gen-data", "dataset");
    if (*surr_cmd) return run_mode(surr, "train-surrogate", "surrogate-train");
    if (*train_cmd) return run_mode(train, "train", "single");
    if (*marl_cmd) return run_mode(marl, "train-marl", "marl");
    if (*eval_cmd) return run_mode(eval, "evaluate", "evaluate");
    if (*pareto_cmd) {
      std::vector<fs::path> runs(pareto_runs.begin(), pareto_runs.end());
      const auto dir = fingen::harness::output_root(pareto.output_root) / (pareto.name.empty() ? "pareto" : pareto.name);
      if (!pareto.quiet) std::cerr << "run directory: " << dir.string() << std::endl;
      const auto summary = fingen::harness::run_pareto(runs, dir);
      fingen::harness::write_json(dir / "summary.json", summary);
      std::cout << summary.dump(2) << std::endl;
      return 0;
    }
    if (*render_cmd) {
      render.overrides["design"] = render_design;
      const auto config = fingen::harness::experiment_config_from_json(merged_config(render, "evaluate"));
      const auto space = fingen::geometry::load_design(render_design);
      fingen::harness::RenderOptions opts;
      opts.field = render_field;
      opts.resolution = config.resolution;
      opts.conditions = config.conditions;
      opts.solver = config.solver;
      const auto out = fingen::harness::render_design(space, opts);
      const auto dir = run_directory(render, "render", config.seed);
      fs::create_directories(dir);
      fingen::harness::write_text(dir / "design.svg", out.svg);
      json summary{{"status", "completed"}, {"shapes", space.shapes.size()}, {"svg", "design.svg"}};
      if (out.field) {
        fingen::harness::write_text(dir / "field.pgm", fingen::harness::encode_scalar_pgm(*out.field));
        summary["field"] = {{"pgm", "field.pgm"}, {"nx", out.field->nx}, {"ny", out.field->ny}};
      }
      fingen::harness::write_json(dir / "summary.json", summary);
      std::cout << summary.dump(2) << std::endl;
      return 0;
    }
  } catch (const fingen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const fingen::ParseError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << std::endl;
    return kExitRuntime;
  }
  return kExitConfig;
}
