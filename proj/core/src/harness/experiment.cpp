#include "fingen/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "fingen/errors.hpp"
#include "fingen/nn/checkpoint.hpp"
#include "fingen/sim/config_io.hpp"

namespace fingen::harness {

using nlohmann::json;
namespace fs = std::filesystem;

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::dataset:
      return "dataset";
    case Mode::surrogate_train:
      return "surrogate-train";
    case Mode::single:
      return "single";
    case Mode::marl:
      return "marl";
    case Mode::evaluate:
      return "evaluate";
  }
  return "single";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::dataset, Mode::surrogate_train, Mode::single, Mode::marl, Mode::evaluate}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + name + "' (expected dataset, surrogate-train, single, marl or evaluate)");
}

json to_json(const ExperimentConfig& c) {
  return {{"mode", mode_name(c.mode)},
          {"backend", c.backend == Backend::simulator ? "simulator" : "surrogate"},
          {"seed", c.seed},
          {"layout", c.layout},
          {"conditions", sim::to_json(c.conditions)},
          {"solver", sim::to_json(c.solver)},
          {"resolution", c.resolution},
          {"env",
           {{"action_fraction", c.env.action_fraction},
            {"horizon", c.env.horizon},
            {"failure_penalty", c.env.failure_penalty}}},
          {"ppo", rl::to_json(c.ppo)},
          {"mappo", marl::to_json(c.mappo)},
          {"dataset", surrogate::to_json(c.dataset)},
          {"surrogate", surrogate::to_json(c.surrogate)},
          {"surrogate_model", c.surrogate_model},
          {"corpus", c.corpus},
          {"design", c.design},
          {"checkpoint_every", c.checkpoint_every},
          {"ranking_samples", c.ranking_samples}};
}

ExperimentConfig experiment_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> known = {
      "mode",   "backend", "seed",    "layout",     "conditions",      "solver", "resolution",       "env",
      "ppo",    "mappo",   "dataset", "surrogate",  "surrogate_model", "corpus", "design",           "checkpoint_every",
      "ranking_samples"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    c.mode = parse_mode(doc.value("mode", mode_name(c.mode)));
    const std::string backend = doc.value("backend", "simulator");
    if (backend == "simulator") {
      c.backend = Backend::simulator;
    } else if (backend == "surrogate") {
      c.backend = Backend::surrogate;
    } else {
      throw ConfigError("backend must be simulator or surrogate, got '" + backend + "'");
    }
    c.seed = doc.value("seed", c.seed);
    c.layout = doc.value("layout", c.layout);
    if (doc.contains("conditions")) c.conditions = sim::flow_conditions_from_json(doc.at("conditions"));
    if (doc.contains("solver")) c.solver = sim::solver_config_from_json(doc.at("solver"));
    c.resolution = doc.value("resolution", c.resolution);
    if (doc.contains("env")) {
      const auto& e = doc.at("env");
      c.env.action_fraction = e.value("action_fraction", c.env.action_fraction);
      c.env.horizon = e.value("horizon", c.env.horizon);
      c.env.failure_penalty = e.value("failure_penalty", c.env.failure_penalty);
    }
    if (doc.contains("ppo")) c.ppo = rl::ppo_config_from_json(doc.at("ppo"));
    if (doc.contains("mappo")) c.mappo = marl::mappo_config_from_json(doc.at("mappo"));
    if (doc.contains("dataset")) c.dataset = surrogate::dataset_config_from_json(doc.at("dataset"));
    if (doc.contains("surrogate")) c.surrogate = surrogate::surrogate_train_config_from_json(doc.at("surrogate"));
    c.surrogate_model = doc.value("surrogate_model", c.surrogate_model);
    c.corpus = doc.value("corpus", c.corpus);
    c.design = doc.value("design", c.design);
    c.checkpoint_every = doc.value("checkpoint_every", c.checkpoint_every);
    c.ranking_samples = doc.value("ranking_samples", c.ranking_samples);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment setting: ") + e.what());
  }

  // One seed, layout and set of conditions per experiment.
  c.ppo.seed = c.seed;
  c.mappo.ppo.seed = c.seed;
  c.dataset.seed = c.seed;
  c.surrogate.seed = c.seed;
  c.dataset.layout = c.layout;
  c.dataset.conditions = c.conditions;
  c.dataset.solver = c.solver;

  try {
    geometry::named_layout(c.layout);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  if (c.resolution < 8) throw ConfigError("resolution must be at least 8");
  if (!(c.env.action_fraction > 0.0 && c.env.action_fraction <= 1.0)) {
    throw ConfigError("env.action_fraction must lie in (0, 1]");
  }
  if (c.env.horizon < 1) throw ConfigError("env.horizon must be at least 1");
  if (c.checkpoint_every < 1 || c.ranking_samples < 1) {
    throw ConfigError("checkpoint_every and ranking_samples must be positive");
  }
  auto require_file = [](const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string(what) + " is required for this mode");
    if (!fs::exists(path)) throw ConfigError(std::string(what) + " '" + path + "' does not exist");
  };
  if (c.backend == Backend::surrogate && (c.mode == Mode::single || c.mode == Mode::marl || c.mode == Mode::evaluate)) {
    require_file(c.surrogate_model, "surrogate_model");
  }
  if (c.mode == Mode::surrogate_train) require_file(c.corpus, "corpus");
  if (c.mode == Mode::evaluate) require_file(c.design, "design");
  return c;
}

fs::path output_root(const fs::path& fallback) {
  if (const char* env = std::getenv("FINGEN_OUTPUT_ROOT"); env && *env) return env;
  return fallback;
}

void prepare_run_directory(const fs::path& dir) {
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "designs");
  fs::remove(dir / "summary.json");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

std::shared_ptr<const rl::Evaluator> make_evaluator(const ExperimentConfig& c) {
  if (c.backend == Backend::simulator) {
    return std::make_shared<rl::SimulatorBackend>(c.conditions, c.resolution, c.solver);
  }
  auto model = std::make_shared<surrogate::SurrogateModel>(surrogate::load_model(c.surrogate_model));
  if (model->conditions.reynolds != c.conditions.reynolds || model->conditions.prandtl != c.conditions.prandtl) {
    throw ConfigError("surrogate was trained for Re=" + std::to_string(model->conditions.reynolds) +
                      ", Pr=" + std::to_string(model->conditions.prandtl) + "; the experiment asks for Re=" +
                      std::to_string(c.conditions.reynolds) + ", Pr=" + std::to_string(c.conditions.prandtl));
  }
  if (!model->layout.empty() && model->layout != c.layout) {
    throw ConfigError("surrogate was trained on the '" + model->layout + "' layout, not '" + c.layout + "'");
  }
  return std::make_shared<surrogate::SurrogateBackend>(model);
}

namespace {

json evaluation_json(const rl::Evaluation& e) {
  json j{{"Q", e.heat_transfer}, {"Dp", e.pressure_drop}, {"reward", e.reward}, {"failed", e.failed}};
  if (e.failed) j["failure"] = e.failure;
  return j;
}

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string hash_of(const json& doc) { return surrogate::hex64(surrogate::fnv1a(doc.dump())); }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

nn::Checkpoint policy_checkpoint(const rl::ActorCritic& model, const rl::PolicyParams& params,
                                 const nn::AdamState& adam, long update, long episodes) {
  nn::Checkpoint ck;
  ck.networks = {model.actor().spec(), model.critic().spec()};
  ck.params = params.values;
  ck.optimizer = adam;
  ck.metadata = {{"kind", "policy"},
                 {"observation_size", model.observation_size()},
                 {"critic_input_size", model.critic_input_size()},
                 {"action_bound", model.action_bound()},
                 {"update", update},
                 {"episodes", episodes}};
  return ck;
}

bool inside_boxes(const json& design) {
  const auto space = geometry::design_space_from_json(design);
  for (std::size_t s = 0; s < space.shapes.size(); ++s) {
    for (const auto& p : space.shapes[s].free_points()) {
      if (!space.boxes.at(s).contains(p, 1e-12)) return false;
    }
  }
  return true;
}

// Shared bookkeeping for single- and multi-agent training runs.
class TrainingLog {
 public:
  TrainingLog(const fs::path& dir, const Logger& log, int checkpoint_every)
      : dir_(dir), log_(log), checkpoint_every_(checkpoint_every) {
    episodes_.open(dir / "log.csv");
    episodes_ << "episode,reward,normalized_reward,failed,Q,Dp,running_best\n";
    updates_.open(dir / "updates.csv");
    updates_ << "update,surrogate,value_loss,entropy,clip_fraction,approx_kl\n";
    evaluated_.open(dir / "designs" / "evaluated.csv");
    evaluated_ << "episode,Q,Dp,reward\n";
    if (!episodes_ || !updates_ || !evaluated_) throw InputError("cannot write logs in " + dir.string());
  }

  void episode(const rl::EpisodeRecord& r, const json& artifact) {
    const double q = r.info.count("Q") ? r.info.at("Q") : 0.0;
    const double dp = r.info.count("Dp") ? r.info.at("Dp") : 0.0;
    if (!r.failed && (best_episode_ < 0 || r.reward > best_)) {
      best_ = r.reward;
      best_episode_ = r.episode;
      char name[48];
      std::snprintf(name, sizeof name, "episode_%06ld.json", r.episode);
      write_json(dir_ / "designs" / name, artifact);
    }
    episodes_ << r.episode << "," << csv_num(r.reward) << "," << csv_num(r.normalized_reward) << ","
              << (r.failed ? 1 : 0) << "," << csv_num(q) << "," << csv_num(dp) << ","
              << csv_num(best_episode_ < 0 ? 0.0 : best_) << "\n";
    if (!r.failed) evaluated_ << r.episode << "," << csv_num(q) << "," << csv_num(dp) << "," << csv_num(r.reward) << "\n";
    if (r.failed) ++failures_;
    if (artifact.contains("design") && !inside_boxes(artifact.at("design"))) boxes_respected_ = false;
  }

  void update(const std::vector<rl::EpisodeRecord>& batch, const rl::UpdateRecord& u, const rl::PpoLearner& learner,
              const rl::ActorCritic& model, long episodes_done) {
    const auto& s = u.stats;
    updates_ << u.update << "," << csv_num(s.surrogate) << "," << csv_num(s.value_loss) << "," << csv_num(s.entropy)
             << "," << csv_num(s.clip_fraction) << "," << csv_num(s.approx_kl) << "\n";
    double mean = 0.0;
    for (const auto& r : batch) mean += r.normalized_reward;
    last_batch_mean_ = batch.empty() ? 0.0 : mean / static_cast<double>(batch.size());
    if ((u.update + 1) % checkpoint_every_ == 0) {
      episodes_.flush();
      updates_.flush();
      evaluated_.flush();
      nn::save_checkpoint(dir_ / "checkpoints" / "latest.json",
                          policy_checkpoint(model, learner.params(), learner.optimizer(), u.update, episodes_done));
    }
    if (log_) {
      char line[160];
      std::snprintf(line, sizeof line, "update %ld: episodes %ld, batch mean %.4f, best %.4f, clip %.2f, kl %.4f",
                    u.update, episodes_done, last_batch_mean_, best_, s.clip_fraction, s.approx_kl);
      log_(line);
    }
  }

  long failures() const { return failures_; }
  bool boxes_respected() const { return boxes_respected_; }
  double last_batch_mean() const { return last_batch_mean_; }

 private:
  fs::path dir_;
  Logger log_;
  int checkpoint_every_;
  std::ofstream episodes_;
  std::ofstream updates_;
  std::ofstream evaluated_;
  double best_ = 0.0;
  long best_episode_ = -1;
  long failures_ = 0;
  bool boxes_respected_ = true;
  double last_batch_mean_ = 0.0;
};

json training_summary(const ExperimentConfig& c, const rl::TrainResult& result, const rl::Evaluation& reference,
                      const TrainingLog& log, const fs::path& dir) {
  json summary{{"status", "completed"},
               {"mode", mode_name(c.mode)},
               {"backend", c.backend == Backend::simulator ? "simulator" : "surrogate"},
               {"seed", c.seed},
               {"config_hash", hash_of(to_json(c))},
               {"episodes", result.episodes.size()},
               {"updates", result.updates.size()},
               {"failures", log.failures()},
               {"final_batch_mean_normalized_reward", log.last_batch_mean()},
               {"boxes_respected", log.boxes_respected()},
               {"reference", evaluation_json(reference)}};
  if (result.best.episode >= 0) {
    const auto& a = result.best.artifact;
    const double q = a.value("Q", 0.0);
    const double dp = a.value("Dp", 0.0);
    summary["best"] = {{"episode", result.best.episode},
                       {"Q", q},
                       {"Dp", dp},
                       {"reward", result.best.reward},
                       {"q_ratio", q / reference.heat_transfer},
                       {"dp_ratio", dp / reference.pressure_drop},
                       {"reward_ratio", result.best.reward / reference.reward},
                       {"design", "designs/best.json"}};
    auto best = a;
    best["episode"] = result.best.episode;
    write_json(dir / "designs" / "best.json", best);
  } else {
    summary["best"] = nullptr;
  }
  return summary;
}

// Simulator cross-check of the best design and the reference for surrogate runs.
void add_simulator_check(const ExperimentConfig& c, const rl::TrainResult& result, json& summary) {
  if (c.backend != Backend::surrogate || result.best.episode < 0) return;
  const rl::SimulatorBackend sim_backend(c.conditions, c.resolution, c.solver);
  const auto space = geometry::design_space_from_json(result.best.artifact.at("design"));
  const auto report = evaluate_design(space, sim_backend);
  summary["simulator_check"] = to_json(report);
  summary["simulator_check"]["resolution"] = c.resolution;
}

json run_training(const ExperimentConfig& c, const fs::path& dir, const Logger& log) {
  const auto evaluator = make_evaluator(c);
  const auto layout = geometry::named_layout(c.layout);
  TrainingLog tlog(dir, log, c.checkpoint_every);
  long done = 0;
  rl::TrainResult result;
  rl::Evaluation reference;
  if (c.mode == Mode::single) {
    const rl::FinEnvironment env(layout, evaluator, c.env);
    reference = env.reference();
    const auto model = rl::make_policy(env, c.ppo);
    rl::TrainCallbacks cb;
    cb.on_episode = [&](const rl::EpisodeRecord& r, const json& a) {
      tlog.episode(r, a);
      ++done;
    };
    cb.on_update = [&](const std::vector<rl::EpisodeRecord>& b, const rl::UpdateRecord& u, const rl::PpoLearner& l) {
      tlog.update(b, u, l, model, done);
    };
    result = rl::train(env, c.ppo, cb);
    nn::save_checkpoint(dir / "checkpoints" / "policy.json",
                        policy_checkpoint(model, result.params, result.optimizer,
                                          static_cast<long>(result.updates.size()), done));
  } else {
    const marl::MultiFinEnvironment env(layout, evaluator, c.env);
    reference = env.reference();
    const auto model = marl::make_shared_policy(env, c.mappo);
    rl::TrainCallbacks cb;
    cb.on_episode = [&](const rl::EpisodeRecord& r, const json& a) {
      tlog.episode(r, a);
      ++done;
    };
    cb.on_update = [&](const std::vector<rl::EpisodeRecord>& b, const rl::UpdateRecord& u, const rl::PpoLearner& l) {
      tlog.update(b, u, l, model, done);
    };
    result = marl::mappo_train(env, c.mappo, cb);
    nn::save_checkpoint(dir / "checkpoints" / "policy.json",
                        policy_checkpoint(model, result.params, result.optimizer,
                                          static_cast<long>(result.updates.size()), done));
  }
  auto summary = training_summary(c, result, reference, tlog, dir);
  add_simulator_check(c, result, summary);
  return summary;
}

json run_dataset(const ExperimentConfig& c, const fs::path& dir, const Logger& log) {
  const auto corpus = surrogate::generate_dataset(c.dataset, [&](int done, int total) {
    if (log && (done % 100 == 0 || done == total)) log("generated " + std::to_string(done) + "/" + std::to_string(total));
  });
  surrogate::save_corpus(dir / "corpus", corpus);
  std::ofstream csv(dir / "log.csv");
  csv << "id,split,attempts,Q,Dp,reward\n";
  double q_min = 1e300, q_max = -1e300, dp_min = 1e300, dp_max = -1e300;
  for (const auto& s : corpus.samples) {
    csv << s.id << "," << (s.validation ? "validation" : "train") << "," << s.attempts << "," << csv_num(s.heat_transfer)
        << "," << csv_num(s.pressure_drop) << "," << csv_num(s.reward) << "\n";
    q_min = std::min(q_min, s.heat_transfer);
    q_max = std::max(q_max, s.heat_transfer);
    dp_min = std::min(dp_min, s.pressure_drop);
    dp_max = std::max(dp_max, s.pressure_drop);
  }
  json summary = corpus.provenance;
  summary.erase("config");
  summary.erase("format");
  summary.erase("version");
  summary["status"] = "completed";
  summary["mode"] = mode_name(c.mode);
  summary["seed"] = c.seed;
  summary["config_hash"] = hash_of(to_json(c));
  summary["corpus"] = "corpus";
  summary["label_range"] = {{"Q", {q_min, q_max}}, {"Dp", {dp_min, dp_max}}};
  return summary;
}

json run_surrogate_training(const ExperimentConfig& c, const fs::path& dir, const Logger& log) {
  const auto corpus = surrogate::load_corpus(c.corpus);
  std::ofstream csv(dir / "log.csv");
  csv << "epoch,train_loss,validation_loss,learning_rate\n";
  const auto result = surrogate::train_surrogate(corpus, c.surrogate, std::nullopt, [&](const surrogate::EpochRecord& e) {
    csv << e.epoch << "," << csv_num(e.train_loss) << "," << csv_num(e.validation_loss) << ","
        << csv_num(e.learning_rate) << "\n";
    csv.flush();
    if (log) {
      char line[128];
      std::snprintf(line, sizeof line, "epoch %d: train %.4e, validation %.4e, lr %.1e", e.epoch, e.train_loss,
                    e.validation_loss, e.learning_rate);
      log(line);
    }
  });
  surrogate::save_model(dir / "checkpoints" / "surrogate.json", result.model);
  const auto& r = result.report;
  json summary{{"status", "completed"},
               {"mode", mode_name(c.mode)},
               {"seed", c.seed},
               {"config_hash", hash_of(to_json(c))},
               {"corpus_hash", result.model.corpus_hash},
               {"train_samples", corpus.split(false).size()},
               {"validation_samples", corpus.split(true).size()},
               {"epochs_run", r.history.size()},
               {"best_epoch", r.best_epoch},
               {"early_stopped", r.early_stopped},
               {"train_error", {{"Q", r.train_error.heat_transfer}, {"Dp", r.train_error.pressure_drop}}},
               {"validation_error", {{"Q", r.validation_error.heat_transfer}, {"Dp", r.validation_error.pressure_drop}}},
               {"model", "checkpoints/surrogate.json"}};
  auto held_out = corpus.split(true);
  if (held_out.size() > static_cast<std::size_t>(c.ranking_samples)) held_out.resize(static_cast<std::size_t>(c.ranking_samples));
  if (!held_out.empty() && corpus.provenance.contains("reference")) {
    const double ref = corpus.provenance.at("reference").at("reward").get<double>();
    summary["ranking"] = {{"samples", held_out.size()},
                          {"reference_reward", ref},
                          {"sign_agreement", surrogate::ranking_agreement(result.model, held_out, ref)}};
  }
  return summary;
}

json run_evaluate(const ExperimentConfig& c, const fs::path& dir) {
  const auto space = geometry::load_design(c.design);
  geometry::save_design(dir / "designs" / "design.json", space);
  const auto evaluator = make_evaluator(c);
  const auto report = evaluate_design(space, *evaluator);
  json summary = to_json(report);
  summary["status"] = report.design.failed ? "diverged" : "completed";
  summary["mode"] = mode_name(c.mode);
  summary["backend"] = evaluator->name();
  summary["config_hash"] = hash_of(to_json(c));
  write_text(dir / "log.csv", "target,Q,Dp,reward,failed\ndesign," + csv_num(report.design.heat_transfer) + "," +
                                  csv_num(report.design.pressure_drop) + "," + csv_num(report.design.reward) + "," +
                                  (report.design.failed ? "1" : "0") + "\nreference," +
                                  csv_num(report.reference.heat_transfer) + "," +
                                  csv_num(report.reference.pressure_drop) + "," + csv_num(report.reference.reward) +
                                  "," + (report.reference.failed ? "1" : "0") + "\n");
  return summary;
}

}  // namespace

DesignReport evaluate_design(const geometry::DesignSpace& space, const rl::Evaluator& evaluator) {
  DesignReport r;
  const auto check = geometry::validate_geometry(space);
  if (!check.ok()) {
    r.design.failed = true;
    r.design.failure = "invalid design: " + check.summary();
  } else {
    r.design = evaluator.evaluate(space);
  }
  r.reference = evaluator.evaluate(geometry::reference_layout(space));
  if (!r.design.failed && !r.reference.failed) {
    r.q_ratio = r.design.heat_transfer / r.reference.heat_transfer;
    r.dp_ratio = r.design.pressure_drop / r.reference.pressure_drop;
    r.reward_ratio = r.design.reward / r.reference.reward;
  }
  return r;
}

json to_json(const DesignReport& r) {
  return {{"design", evaluation_json(r.design)},
          {"reference", evaluation_json(r.reference)},
          {"ratios", {{"Q", r.q_ratio}, {"Dp", r.dp_ratio}, {"reward", r.reward_ratio}}}};
}

RenderOutput render_design(const geometry::DesignSpace& space, const RenderOptions& options) {
  RenderOutput out;
  if (options.field) {
    auto solver = options.solver;
    solver.keep_temperature_snapshot = true;
    const auto r = sim::run_simulation(space, options.conditions, options.resolution, solver);
    if (r.diverged || !r.temperature) throw Error("field simulation failed: " + r.failure);
    geometry::ScalarImage img{r.nx, r.ny, *r.temperature};
    const double t_in = options.conditions.inlet_temperature;
    const double span = options.conditions.solid_temperature - t_in;
    for (double& v : img.values) v = (v - t_in) / span;
    out.field = img;
  }
  out.svg = geometry::render_svg(space, out.field);
  return out;
}

std::string encode_scalar_pgm(const geometry::ScalarImage& image) {
  std::ostringstream out;
  out << "P5\n" << image.nx << " " << image.ny << "\n255\n";
  std::string body(static_cast<std::size_t>(image.nx) * image.ny, '\0');
  for (int j = 0; j < image.ny; ++j) {
    const int row = image.ny - 1 - j;
    for (int i = 0; i < image.nx; ++i) {
      const double v = std::clamp(image.values[static_cast<std::size_t>(j) * image.nx + i], 0.0, 1.0);
      body[static_cast<std::size_t>(row) * image.nx + i] = static_cast<char>(std::lround(255.0 * v));
    }
  }
  out << body;
  return out.str();
}

std::vector<ParetoRecord> load_pareto_records(const fs::path& run_dir) {
  const auto summary = read_json(run_dir / "summary.json");
  if (!summary.contains("reference")) throw InputError(run_dir.string() + " is not a training run");
  const double q_ref = summary.at("reference").at("Q").get<double>();
  const double dp_ref = summary.at("reference").at("Dp").get<double>();
  std::ifstream in(run_dir / "designs" / "evaluated.csv");
  if (!in) throw ParseError("cannot open " + (run_dir / "designs" / "evaluated.csv").string());
  std::vector<ParetoRecord> records;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<double> v;
    while (std::getline(ss, field, ',')) v.push_back(std::stod(field));
    if (v.size() != 4) throw ParseError("malformed line in evaluated.csv: " + line);
    ParetoRecord r;
    r.episode = static_cast<long>(v[0]);
    r.design = run_dir.filename().string() + ":" + std::to_string(r.episode);
    r.q_ratio = v[1] / q_ref;
    r.dp_ratio = v[2] / dp_ref;
    r.reward = v[3];
    records.push_back(std::move(r));
  }
  return records;
}

json run_pareto(const std::vector<fs::path>& runs, const fs::path& dir) {
  std::vector<ParetoRecord> records;
  for (const auto& run : runs) {
    const auto part = load_pareto_records(run);
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto front = pareto_front(records);
  fs::create_directories(dir);
  write_text(dir / "pareto.csv", pareto_csv(records, front));
  write_text(dir / "pareto.svg", pareto_svg(records, front));
  json pts = json::array();
  for (auto i : front) {
    pts.push_back({{"design", records[i].design}, {"q_ratio", records[i].q_ratio}, {"dp_ratio", records[i].dp_ratio}});
  }
  return {{"status", "completed"}, {"records", records.size()}, {"front_size", front.size()}, {"front", pts}};
}

json run_experiment(const ExperimentConfig& c, const fs::path& dir, const Logger& log) {
  prepare_run_directory(dir);
  write_json(dir / "config.json", to_json(c));
  const Stopwatch clock;
  json summary;
  try {
    switch (c.mode) {
      case Mode::dataset:
        summary = run_dataset(c, dir, log);
        break;
      case Mode::surrogate_train:
        summary = run_surrogate_training(c, dir, log);
        break;
      case Mode::single:
      case Mode::marl:
        summary = run_training(c, dir, log);
        break;
      case Mode::evaluate:
        summary = run_evaluate(c, dir);
        break;
    }
  } catch (const std::exception& e) {
    write_json(dir / "summary.json", {{"status", "failed"}, {"mode", mode_name(c.mode)}, {"error", e.what()}});
    write_json(dir / "timing.json", {{"wall_seconds", clock.seconds()}});
    throw;
  }
  write_json(dir / "summary.json", summary);
  write_json(dir / "timing.json", {{"wall_seconds", clock.seconds()}});
  return summary;
}

}  // namespace fingen::harness
