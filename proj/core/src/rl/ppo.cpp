#include "fingen/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fingen/errors.hpp"
#include "fingen/rl/parallel.hpp"

namespace fingen::rl {

Advantages compute_advantages(const std::vector<Transition>& batch, double gamma, double lambda) {
  if (batch.empty()) throw InputError("cannot compute advantages of an empty batch");
  if (!batch.back().done) throw InputError("last episode in the batch is not terminated");
  Advantages a;
  a.raw.assign(batch.size(), 0.0);
  a.returns.assign(batch.size(), 0.0);
  double next_value = 0.0;
  double running = 0.0;
  for (std::size_t k = batch.size(); k-- > 0;) {
    const auto& t = batch[k];
    if (t.done) {
      next_value = 0.0;
      running = 0.0;
    }
    const double delta = t.reward + gamma * next_value - t.value;
    running = delta + gamma * lambda * running;
    a.raw[k] = running;
    a.returns[k] = running + t.value;
    next_value = t.value;
  }
  a.normalized = a.raw;
  normalize(a.normalized);
  return a;
}

void normalize(std::vector<double>& values) {
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (double& v : values) v = sd > 1e-8 ? (v - mean) / sd : v - mean;
}

LossReport ppo_loss(const ActorCritic& model, const PolicyParams& params, const std::vector<Transition>& samples,
                    const std::vector<double>& advantages, const std::vector<double>& returns,
                    const LossCoefficients& coef) {
  if (samples.empty()) throw InputError("PPO loss over an empty batch");
  if (!(coef.clip > 0.0 && coef.clip < 1.0)) throw InputError("clip epsilon must lie in (0, 1)");
  const int n = static_cast<int>(samples.size());
  const int d = model.action_size();
  nn::Tensor obs({n, model.observation_size()});
  nn::Tensor crit({n, model.critic_input_size()});
  for (int i = 0; i < n; ++i) {
    std::copy(samples[i].observation.begin(), samples[i].observation.end(), obs.row(i));
    std::copy(samples[i].critic_input.begin(), samples[i].critic_input.end(), crit.row(i));
  }
  nn::ForwardRecord actor_rec;
  nn::ForwardRecord critic_rec;
  const auto mu = model.mean(params, obs, &actor_rec);
  const auto values = model.value(params, crit, &critic_rec);
  const auto log_std = model.log_std(params);

  LossReport r;
  r.gradient.assign(params.values.size(), 0.0);
  nn::Tensor dmu({n, d});
  nn::Tensor dv({n, 1});
  double* g_log_std = r.gradient.data() + model.log_std_offset();
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const auto& s = samples[i];
    const std::span<const double> m(mu.row(i), d);
    const double lp = model.log_prob(m, log_std, s.pre_squash);
    const double ratio = std::exp(lp - s.log_prob);
    const double a = advantages[i];
    const double clipped = std::clamp(ratio, 1.0 - coef.clip, 1.0 + coef.clip);
    const bool use_unclipped = ratio * a <= clipped * a;
    r.surrogate -= (use_unclipped ? ratio * a : clipped * a) * inv_n;
    if (std::abs(ratio - 1.0) > coef.clip) r.clip_fraction += inv_n;
    r.approx_kl += (s.log_prob - lp) * inv_n;
    if (use_unclipped) {
      const double dlp = -ratio * a * inv_n;  // d surrogate / d log_prob
      for (int k = 0; k < d; ++k) {
        const double inv_var = std::exp(-2.0 * log_std[k]);
        const double diff = s.pre_squash[k] - m[k];
        dmu.row(i)[k] = dlp * diff * inv_var;
        g_log_std[k] += dlp * (diff * diff * inv_var - 1.0);
      }
    }
    const double err = values[i] - returns[i];
    r.value_loss += err * err * inv_n;
    dv.data[i] = coef.value * 2.0 * err * inv_n;
  }
  r.entropy = ActorCritic::entropy(log_std);
  for (int k = 0; k < d; ++k) g_log_std[k] -= coef.entropy;
  r.total = r.surrogate + coef.value * r.value_loss - coef.entropy * r.entropy;

  std::span<double> grad(r.gradient);
  model.actor().backward(model.actor_params(params), actor_rec, dmu,
                         grad.subspan(0, model.actor().parameter_count()));
  model.critic().backward(model.critic_params(params), critic_rec, dv,
                          grad.subspan(model.critic_offset(), model.critic().parameter_count()));
  return r;
}

nlohmann::json to_json(const PpoConfig& c) {
  return {{"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"minibatches", c.minibatches},
          {"gamma", c.gamma},
          {"lambda", c.lambda},
          {"clip", c.loss.clip},
          {"value_coef", c.loss.value},
          {"entropy_coef", c.loss.entropy},
          {"learning_rate", c.learning_rate},
          {"max_grad_norm", c.max_grad_norm},
          {"actor_hidden", c.actor_hidden},
          {"critic_hidden", c.critic_hidden},
          {"initial_log_std", c.initial_log_std},
          {"episodes", c.episodes},
          {"seed", c.seed},
          {"workers", c.workers},
          {"max_failure_rate", c.max_failure_rate}};
}

PpoConfig ppo_config_from_json(const nlohmann::json& doc, PpoConfig c) {
  try {
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.epochs = doc.value("epochs", c.epochs);
    c.minibatches = doc.value("minibatches", c.minibatches);
    c.gamma = doc.value("gamma", c.gamma);
    c.lambda = doc.value("lambda", c.lambda);
    c.loss.clip = doc.value("clip", c.loss.clip);
    c.loss.value = doc.value("value_coef", c.loss.value);
    c.loss.entropy = doc.value("entropy_coef", c.loss.entropy);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.max_grad_norm = doc.value("max_grad_norm", c.max_grad_norm);
    c.actor_hidden = doc.value("actor_hidden", c.actor_hidden);
    c.critic_hidden = doc.value("critic_hidden", c.critic_hidden);
    c.initial_log_std = doc.value("initial_log_std", c.initial_log_std);
    c.episodes = doc.value("episodes", c.episodes);
    c.seed = doc.value("seed", c.seed);
    c.workers = doc.value("workers", c.workers);
    c.max_failure_rate = doc.value("max_failure_rate", c.max_failure_rate);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad PPO setting: ") + e.what());
  }
  if (c.batch_size < 1 || c.epochs < 1 || c.minibatches < 1 || c.episodes < 1) {
    throw ConfigError("batch_size, epochs, minibatches and episodes must be positive");
  }
  if (!(c.loss.clip > 0.0 && c.loss.clip < 1.0)) throw ConfigError("clip must lie in (0, 1)");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0) || !(c.lambda >= 0.0 && c.lambda <= 1.0)) {
    throw ConfigError("gamma and lambda must lie in [0, 1]");
  }
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  return c;
}

PpoLearner::PpoLearner(const ActorCritic& model, PolicyParams params, const PpoConfig& config)
    : model_(model), params_(std::move(params)), config_(config), rng_(derive_seed(config.seed, 0xADA)) {}

void PpoLearner::restore(PolicyParams params, nn::AdamState optimizer) {
  params_ = std::move(params);
  adam_ = std::move(optimizer);
}

LossReport PpoLearner::update(const std::vector<Transition>& batch, const Advantages& adv) {
  const std::size_t n = batch.size();
  const std::size_t parts = std::min<std::size_t>(std::max(1, config_.minibatches), n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  nn::AdamConfig adam_cfg;
  adam_cfg.step_size = config_.learning_rate;
  LossReport last;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_);
    LossReport sum;
    for (std::size_t part = 0; part < parts; ++part) {
      const std::size_t lo = part * n / parts;
      const std::size_t hi = (part + 1) * n / parts;
      std::vector<Transition> mb;
      std::vector<double> a;
      std::vector<double> ret;
      for (std::size_t k = lo; k < hi; ++k) {
        mb.push_back(batch[order[k]]);
        a.push_back(adv.normalized[order[k]]);
        ret.push_back(adv.returns[order[k]]);
      }
      auto r = ppo_loss(model_, params_, mb, a, ret, config_.loss);
      for (double g : r.gradient) {
        if (!std::isfinite(g)) throw TrainingError("non-finite PPO gradient");
      }
      nn::clip_grad_norm(r.gradient, config_.max_grad_norm);
      nn::adam_update(params_.values, r.gradient, adam_, adam_cfg);
      const double w = static_cast<double>(hi - lo) / static_cast<double>(n);
      sum.total += w * r.total;
      sum.surrogate += w * r.surrogate;
      sum.value_loss += w * r.value_loss;
      sum.entropy += w * r.entropy;
      sum.clip_fraction += w * r.clip_fraction;
      sum.approx_kl += w * r.approx_kl;
    }
    last = std::move(sum);
  }
  return last;
}

ActorCritic make_policy(const Environment& env, const PpoConfig& config) {
  return ActorCritic(env.observation_size(), env.observation_size(), env.action_bound(), config.actor_hidden,
                     config.critic_hidden);
}

namespace {

struct Rollout {
  std::vector<Transition> steps;
  EpisodeRecord record;
  nlohmann::json artifact;
  std::string failure;
};

}  // namespace

TrainResult train(const Environment& env, const PpoConfig& config, const TrainCallbacks& callbacks) {
  const auto model = make_policy(env, config);
  std::mt19937_64 init_rng(derive_seed(config.seed, 0x1417));
  PpoLearner learner(model, model.initial(init_rng, config.initial_log_std), config);
  const double reference = env.reference_reward();
  if (!(std::abs(reference) > 0.0) || !std::isfinite(reference)) throw TrainingError("reference reward must be nonzero");
  const int workers = config.workers > 0 ? config.workers : default_workers();

  TrainResult result;
  long episode = 0;
  long update = 0;
  while (episode < config.episodes) {
    const int count = static_cast<int>(std::min<long>(config.batch_size, config.episodes - episode));
    std::vector<Rollout> rollouts(count);
    const PolicyParams snapshot = learner.params();
    parallel_for(count, workers, [&](std::size_t b) {
      const long index = episode + static_cast<long>(b);
      std::mt19937_64 rng(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(index)));
      auto ep = env.start(derive_seed(config.seed, 5000000 + static_cast<std::uint64_t>(index)));
      Rollout& out = rollouts[b];
      out.record.episode = index;
      for (int t = 0; t < env.horizon(); ++t) {
        Transition tr;
        tr.observation = ep->observation();
        tr.critic_input = tr.observation;
        const auto s = model.sample(snapshot, tr.observation, rng);
        tr.pre_squash = s.pre_squash;
        tr.action = s.action;
        tr.log_prob = s.log_prob;
        tr.value = model.value(snapshot, tr.critic_input);
        const auto outcome = ep->step(tr.action);
        tr.reward = outcome.reward / reference;
        tr.done = outcome.done || t + 1 == env.horizon();
        out.record.reward += outcome.reward;
        out.record.failed = out.record.failed || outcome.failed;
        if (outcome.failed && out.failure.empty()) out.failure = outcome.failure;
        for (const auto& [k, v] : outcome.info) out.record.info[k] = v;
        out.steps.push_back(std::move(tr));
        if (out.steps.back().done) break;
      }
      out.record.normalized_reward = out.record.reward / reference;
      out.artifact = ep->artifact();
    });

    std::vector<Transition> batch;
    std::vector<EpisodeRecord> records;
    int failures = 0;
    std::string first_failure;
    for (auto& r : rollouts) {
      batch.insert(batch.end(), r.steps.begin(), r.steps.end());
      if (r.record.failed) {
        ++failures;
        if (first_failure.empty()) first_failure = r.failure;
      } else if (result.best.episode < 0 || r.record.reward > result.best.reward) {
        result.best = {r.record.episode, r.record.reward, r.artifact};
      }
      records.push_back(r.record);
      result.episodes.push_back(r.record);
      if (callbacks.on_episode) callbacks.on_episode(r.record, r.artifact);
    }
    if (static_cast<double>(failures) > config.max_failure_rate * count) {
      throw TrainingError(std::to_string(failures) + " of " + std::to_string(count) +
                          " episodes failed in one batch (first: " + first_failure + ")");
    }
    const auto adv = compute_advantages(batch, config.gamma, config.lambda);
    UpdateRecord u{update++, learner.update(batch, adv)};
    result.updates.push_back(u);
    if (callbacks.on_update) callbacks.on_update(records, u, learner);
    episode += count;
  }
  result.params = learner.params();
  result.optimizer = learner.optimizer();
  return result;
}

}  // namespace fingen::rl
