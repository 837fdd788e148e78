#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fingen/nn/network.hpp"
#include "fingen/rl/fin_env.hpp"
#include "fingen/surrogate/dataset.hpp"

namespace fingen::surrogate {

// Targets are z-scored Q and z-scored log(Dp).
struct LabelNormalization {
  double q_mean = 0.0;
  double q_std = 1.0;
  double log_dp_mean = 0.0;
  double log_dp_std = 1.0;

  static LabelNormalization fit(const std::vector<const LabeledSample*>& samples);
  std::array<double, 2> normalize(double q, double dp) const;
  std::array<double, 2> denormalize(double zq, double zdp) const;  // {Q, Dp}
};

// conv8-relu-pool, conv16-relu-pool, conv16-relu-pool, conv32-relu-pool,
// dense 128, relu, dense 2 over a 1 x side x side raster.
nn::NetworkSpec default_surrogate_spec(int side);

struct SurrogateModel {
  nn::NetworkSpec spec;
  std::vector<double> params;
  int raster_side = 64;
  LabelNormalization normalization;
  sim::FlowConditions conditions;
  double dp_floor = 1e-6;
  std::string layout;
  // Simulator resolution of the training labels. The backend treats designs
  // the simulator cannot resolve at this resolution as failures instead of
  // extrapolating to them; 0 disables the check.
  int label_resolution = 0;
  std::string corpus_hash;
  nlohmann::json reference = nlohmann::json::object();  // simulator reference from the corpus
};

struct Prediction {
  double heat_transfer = 0.0;
  double pressure_drop = 0.0;
  double reward = 0.0;
};

nn::Tensor raster_batch(const std::vector<const geometry::Raster*>& rasters);
std::vector<Prediction> predict_rasters(const SurrogateModel& model, const std::vector<const geometry::Raster*>& rasters);
// Rasterizes at the model's side; throws PreconditionError for a design that
// fails validation.
Prediction predict(const SurrogateModel& model, const geometry::DesignSpace& space);

void save_model(const std::filesystem::path& path, const SurrogateModel& model);
SurrogateModel load_model(const std::filesystem::path& path);  // throws ParseError

struct SurrogateTrainConfig {
  int epochs = 60;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int patience = 12;  // epochs without validation improvement before stopping
  int plateau = 4;    // epochs without improvement before the step size is halved
  double min_learning_rate = 1e-6;
  std::size_t min_samples = 100;
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const SurrogateTrainConfig& config);
SurrogateTrainConfig surrogate_train_config_from_json(const nlohmann::json& doc, SurrogateTrainConfig defaults = {});

// Mean absolute relative error per target.
struct TargetErrors {
  double heat_transfer = 0.0;
  double pressure_drop = 0.0;
};

TargetErrors mean_relative_error(const SurrogateModel& model, const std::vector<const LabeledSample*>& samples);

// Fraction of samples where sign(predicted reward - reference) matches
// sign(simulated reward - reference).
double ranking_agreement(const SurrogateModel& model, const std::vector<const LabeledSample*>& samples,
                         double reference_reward);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;  // train loss when there is no validation split
  double learning_rate = 0.0;
};

struct TrainReport {
  TargetErrors train_error;
  TargetErrors validation_error;
  int best_epoch = 0;
  bool early_stopped = false;
  std::vector<EpochRecord> history;
};

struct SurrogateTrainResult {
  SurrogateModel model;
  TrainReport report;
};

// Minimizes MSE on normalized targets with Adam; keeps the parameters of the
// epoch with the lowest validation loss. Throws InputError for corpora below
// min_samples or with overlapping splits and TrainingError on a non-finite
// loss.
SurrogateTrainResult train_surrogate(const Corpus& corpus, const SurrogateTrainConfig& config,
                                     std::optional<nn::NetworkSpec> spec = std::nullopt,
                                     const std::function<void(const EpochRecord&)>& on_epoch = {});

// Evaluator backed by a trained model; safe for concurrent use.
class SurrogateBackend final : public rl::Evaluator {
 public:
  explicit SurrogateBackend(std::shared_ptr<const SurrogateModel> model) : model_(std::move(model)) {}
  rl::Evaluation evaluate(const geometry::DesignSpace& space) const override;
  std::string name() const override { return "surrogate"; }
  const SurrogateModel& model() const { return *model_; }

 private:
  std::shared_ptr<const SurrogateModel> model_;
};

}  // namespace fingen::surrogate
