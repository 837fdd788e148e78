#include "fingen/surrogate/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "fingen/errors.hpp"
#include "fingen/geometry/raster.hpp"
#include "fingen/nn/adam.hpp"
#include "fingen/nn/checkpoint.hpp"
#include "fingen/rl/parallel.hpp"
#include "fingen/sim/config_io.hpp"
#include "fingen/sim/flow.hpp"

namespace fingen::surrogate {

using nlohmann::json;

namespace {

constexpr int kPredictChunk = 64;

void mean_std(const std::vector<double>& x, double& mean, double& std_dev) {
  mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  std_dev = std::sqrt(ss / static_cast<double>(x.size()));
  // Constant targets: any scale is exact; a small one makes the network's
  // residual input sensitivity negligible in label units.
  if (!(std_dev > 1e-12 * std::max(1.0, std::abs(mean)))) std_dev = 1e-3 * std::max(1.0, std::abs(mean));
}

json normalization_json(const LabelNormalization& n) {
  return {{"q_mean", n.q_mean}, {"q_std", n.q_std}, {"log_dp_mean", n.log_dp_mean}, {"log_dp_std", n.log_dp_std}};
}

}  // namespace

LabelNormalization LabelNormalization::fit(const std::vector<const LabeledSample*>& samples) {
  if (samples.empty()) throw InputError("cannot fit label normalization on zero samples");
  std::vector<double> q;
  std::vector<double> ldp;
  for (const auto* s : samples) {
    q.push_back(s->heat_transfer);
    ldp.push_back(std::log(s->pressure_drop));
  }
  LabelNormalization n;
  mean_std(q, n.q_mean, n.q_std);
  mean_std(ldp, n.log_dp_mean, n.log_dp_std);
  return n;
}

std::array<double, 2> LabelNormalization::normalize(double q, double dp) const {
  return {(q - q_mean) / q_std, (std::log(dp) - log_dp_mean) / log_dp_std};
}

std::array<double, 2> LabelNormalization::denormalize(double zq, double zdp) const {
  return {q_mean + q_std * zq, std::exp(log_dp_mean + log_dp_std * zdp)};
}

nn::NetworkSpec default_surrogate_spec(int side) {
  using nn::LayerSpec;
  nn::NetworkSpec spec;
  spec.input_shape = {1, side, side};
  for (int channels : {8, 16, 16, 32}) {
    spec.layers.push_back(LayerSpec::conv(channels, 3));
    spec.layers.push_back(LayerSpec::relu());
    spec.layers.push_back(LayerSpec::maxpool(2));
  }
  spec.layers.push_back(LayerSpec::flatten());
  spec.layers.push_back(LayerSpec::dense(128));
  spec.layers.push_back(LayerSpec::relu());
  spec.layers.push_back(LayerSpec::dense(2));
  spec.shapes();  // throws for sides that do not survive four poolings
  return spec;
}

nn::Tensor raster_batch(const std::vector<const geometry::Raster*>& rasters) {
  if (rasters.empty()) throw InputError("empty raster batch");
  const int w = rasters[0]->width;
  const int h = rasters[0]->height;
  nn::Tensor t({static_cast<int>(rasters.size()), 1, h, w});
  for (std::size_t b = 0; b < rasters.size(); ++b) {
    if (rasters[b]->width != w || rasters[b]->height != h) throw ShapeError("rasters in a batch differ in size");
    double* row = t.row(static_cast<int>(b));
    for (std::size_t k = 0; k < rasters[b]->pixels.size(); ++k) row[k] = rasters[b]->pixels[k];
  }
  return t;
}

std::vector<Prediction> predict_rasters(const SurrogateModel& model, const std::vector<const geometry::Raster*>& rasters) {
  for (const auto* r : rasters) {
    if (r->width != model.raster_side || r->height != model.raster_side) {
      throw ShapeError("raster is " + std::to_string(r->width) + "x" + std::to_string(r->height) + ", model expects " +
                       std::to_string(model.raster_side));
    }
  }
  const nn::Network net(model.spec);
  std::vector<Prediction> out;
  out.reserve(rasters.size());
  for (std::size_t start = 0; start < rasters.size(); start += kPredictChunk) {
    const auto end = std::min(rasters.size(), start + kPredictChunk);
    const std::vector<const geometry::Raster*> chunk(rasters.begin() + static_cast<std::ptrdiff_t>(start),
                                                     rasters.begin() + static_cast<std::ptrdiff_t>(end));
    const auto y = net.forward(model.params, raster_batch(chunk));
    for (int b = 0; b < y.batch(); ++b) {
      const auto [q, dp] = model.normalization.denormalize(y.row(b)[0], y.row(b)[1]);
      const double floored = std::max(dp, model.dp_floor);
      out.push_back({q, floored, sim::reward_from(q, floored)});
    }
  }
  return out;
}

Prediction predict(const SurrogateModel& model, const geometry::DesignSpace& space) {
  const auto raster = geometry::rasterize_mask(space, model.raster_side, model.raster_side);
  return predict_rasters(model, {&raster}).front();
}

void save_model(const std::filesystem::path& path, const SurrogateModel& model) {
  nn::Checkpoint ck;
  ck.networks = {model.spec};
  ck.params = model.params;
  ck.metadata = {{"kind", "surrogate"},
                 {"raster_side", model.raster_side},
                 {"normalization", normalization_json(model.normalization)},
                 {"conditions", sim::to_json(model.conditions)},
                 {"dp_floor", model.dp_floor},
                 {"layout", model.layout},
                 {"label_resolution", model.label_resolution},
                 {"corpus_hash", model.corpus_hash},
                 {"reference", model.reference}};
  nn::save_checkpoint(path, ck);
}

SurrogateModel load_model(const std::filesystem::path& path) {
  const auto ck = nn::load_checkpoint(path);
  try {
    const auto& meta = ck.metadata;
    if (meta.value("kind", "") != "surrogate" || ck.networks.size() != 1) {
      throw ParseError(path.string() + " is not a surrogate checkpoint");
    }
    SurrogateModel m;
    m.spec = ck.networks[0];
    m.params = ck.params;
    m.raster_side = meta.at("raster_side").get<int>();
    const auto& n = meta.at("normalization");
    m.normalization = {n.at("q_mean").get<double>(), n.at("q_std").get<double>(), n.at("log_dp_mean").get<double>(),
                       n.at("log_dp_std").get<double>()};
    m.conditions = sim::flow_conditions_from_json(meta.at("conditions"));
    m.dp_floor = meta.at("dp_floor").get<double>();
    m.layout = meta.value("layout", "");
    m.label_resolution = meta.value("label_resolution", 0);
    m.corpus_hash = meta.value("corpus_hash", "");
    m.reference = meta.value("reference", json::object());
    if (nn::Network(m.spec).parameter_count() != m.params.size()) {
      throw ParseError(path.string() + ": parameter count does not match the network");
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json to_json(const SurrogateTrainConfig& c) {
  return {{"epochs", c.epochs},   {"batch_size", c.batch_size},   {"learning_rate", c.learning_rate},
          {"patience", c.patience}, {"plateau", c.plateau}, {"min_learning_rate", c.min_learning_rate}, {"min_samples", c.min_samples}, {"seed", c.seed}};
}

SurrogateTrainConfig surrogate_train_config_from_json(const json& doc, SurrogateTrainConfig c) {
  try {
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.patience = doc.value("patience", c.patience);
    c.plateau = doc.value("plateau", c.plateau);
    c.min_learning_rate = doc.value("min_learning_rate", c.min_learning_rate);
    c.min_samples = doc.value("min_samples", c.min_samples);
    c.seed = doc.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad surrogate training setting: ") + e.what());
  }
  if (c.epochs < 1 || c.batch_size < 1 || c.patience < 1 || c.plateau < 1) {
    throw ConfigError("epochs, batch_size, patience and plateau must be positive");
  }
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  return c;
}

TargetErrors mean_relative_error(const SurrogateModel& model, const std::vector<const LabeledSample*>& samples) {
  TargetErrors e;
  if (samples.empty()) return e;
  std::vector<const geometry::Raster*> rasters;
  for (const auto* s : samples) rasters.push_back(&s->raster);
  const auto pred = predict_rasters(model, rasters);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    e.heat_transfer += std::abs(pred[k].heat_transfer - samples[k]->heat_transfer) / std::abs(samples[k]->heat_transfer);
    e.pressure_drop += std::abs(pred[k].pressure_drop - samples[k]->pressure_drop) / std::abs(samples[k]->pressure_drop);
  }
  e.heat_transfer /= static_cast<double>(samples.size());
  e.pressure_drop /= static_cast<double>(samples.size());
  return e;
}

double ranking_agreement(const SurrogateModel& model, const std::vector<const LabeledSample*>& samples,
                         double reference_reward) {
  if (samples.empty()) throw InputError("ranking agreement needs at least one sample");
  std::vector<const geometry::Raster*> rasters;
  for (const auto* s : samples) rasters.push_back(&s->raster);
  const auto pred = predict_rasters(model, rasters);
  int agree = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    agree += (pred[k].reward > reference_reward) == (samples[k]->reward > reference_reward);
  }
  return static_cast<double>(agree) / static_cast<double>(samples.size());
}

namespace {

// Mean squared error over both normalized targets; adds dLoss/dparams to
// `grads` when given.
double batch_loss(const nn::Network& net, const std::vector<double>& params, const nn::Tensor& x,
                  const std::vector<std::array<double, 2>>& y, std::vector<double>* grads) {
  nn::ForwardRecord rec;
  const auto out = net.forward(params, x, grads ? &rec : nullptr);
  const int b = out.batch();
  nn::Tensor upstream({b, 2});
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    for (int k = 0; k < 2; ++k) {
      const double d = out.row(i)[k] - y[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      loss += d * d;
      upstream.row(i)[k] = 2.0 * d / (2.0 * b);
    }
  }
  loss /= 2.0 * b;
  if (grads) net.backward(params, rec, upstream, *grads);
  return loss;
}

double dataset_loss(const nn::Network& net, const std::vector<double>& params,
                    const std::vector<const LabeledSample*>& samples, const LabelNormalization& norm) {
  double total = 0.0;
  for (std::size_t start = 0; start < samples.size(); start += kPredictChunk) {
    const auto end = std::min(samples.size(), start + kPredictChunk);
    std::vector<const geometry::Raster*> rasters;
    std::vector<std::array<double, 2>> y;
    for (std::size_t k = start; k < end; ++k) {
      rasters.push_back(&samples[k]->raster);
      y.push_back(norm.normalize(samples[k]->heat_transfer, samples[k]->pressure_drop));
    }
    total += batch_loss(net, params, raster_batch(rasters), y, nullptr) * static_cast<double>(end - start);
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace

SurrogateTrainResult train_surrogate(const Corpus& corpus, const SurrogateTrainConfig& config,
                                     std::optional<nn::NetworkSpec> spec,
                                     const std::function<void(const EpochRecord&)>& on_epoch) {
  if (corpus.samples.size() < config.min_samples) {
    throw InputError("corpus has " + std::to_string(corpus.samples.size()) + " samples, training needs at least " +
                     std::to_string(config.min_samples));
  }
  corpus.check_disjoint();
  const auto train = corpus.split(false);
  const auto val = corpus.split(true);
  if (train.empty()) throw InputError("corpus has no training samples");
  for (const auto& s : corpus.samples) {
    if (!(std::isfinite(s.heat_transfer) && s.pressure_drop > 0.0 && std::isfinite(s.pressure_drop))) {
      throw InputError("sample " + std::to_string(s.id) + " has non-finite or non-positive labels");
    }
  }

  SurrogateModel model;
  model.raster_side = train[0]->raster.width;
  model.spec = spec ? *spec : default_surrogate_spec(model.raster_side);
  model.normalization = LabelNormalization::fit(train);
  if (corpus.provenance.contains("config")) {
    const auto cfg = dataset_config_from_json(corpus.provenance.at("config"));
    model.conditions = cfg.conditions;
    model.dp_floor = cfg.solver.dp_floor;
    model.layout = cfg.layout;
    model.label_resolution = cfg.resolution;
  }
  model.corpus_hash = corpus_hash(corpus);
  model.reference = corpus.provenance.value("reference", json::object());

  const nn::Network net(model.spec);
  if (net.spec().input_shape != std::vector<int>{1, model.raster_side, model.raster_side}) {
    throw ShapeError("network input does not match the corpus rasters");
  }
  std::mt19937_64 rng(rl::derive_seed(config.seed, 0x5E7));
  model.params = net.initial_parameters(rng, 0.1);
  nn::AdamState adam;
  nn::AdamConfig adam_config{config.learning_rate};
  int since_decay = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grads(model.params.size());
  std::vector<double> best_params = model.params;
  double best_loss = std::numeric_limits<double>::infinity();
  TrainReport report;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double running = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<const geometry::Raster*> rasters;
      std::vector<std::array<double, 2>> y;
      for (std::size_t k = start; k < end; ++k) {
        const auto* s = train[order[k]];
        rasters.push_back(&s->raster);
        y.push_back(model.normalization.normalize(s->heat_transfer, s->pressure_drop));
      }
      std::fill(grads.begin(), grads.end(), 0.0);
      const double loss = batch_loss(net, model.params, raster_batch(rasters), y, &grads);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite surrogate loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                            std::to_string(start) + " (learning rate " + std::to_string(config.learning_rate) + ")");
      }
      running += loss * static_cast<double>(end - start);
      nn::adam_update(model.params, grads, adam, adam_config);
    }
    EpochRecord rec{epoch, running / static_cast<double>(train.size()), 0.0, adam_config.step_size};
    rec.validation_loss = val.empty() ? rec.train_loss : dataset_loss(net, model.params, val, model.normalization);
    report.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.validation_loss < best_loss) {
      best_loss = rec.validation_loss;
      best_params = model.params;
      report.best_epoch = epoch;
      since_decay = 0;
    } else if (epoch - report.best_epoch >= config.patience) {
      report.early_stopped = true;
      break;
    } else if (++since_decay >= config.plateau) {
      adam_config.step_size = std::max(config.min_learning_rate, 0.5 * adam_config.step_size);
      since_decay = 0;
    }
  }
  model.params = std::move(best_params);
  report.train_error = mean_relative_error(model, train);
  report.validation_error = mean_relative_error(model, val);
  return {std::move(model), std::move(report)};
}

rl::Evaluation SurrogateBackend::evaluate(const geometry::DesignSpace& space) const {
  rl::Evaluation e;
  try {
    if (model_->label_resolution > 0) sim::build_grid(space, model_->label_resolution, model_->conditions);
    const auto p = predict(*model_, space);
    e.heat_transfer = p.heat_transfer;
    e.pressure_drop = p.pressure_drop;
    e.reward = p.reward;
  } catch (const Error& err) {
    e.failed = true;
    e.failure = err.what();
  }
  return e;
}

}  // namespace fingen::surrogate
