#include "fingen/nn/adam.hpp"

#include <cmath>

#include "fingen/errors.hpp"

namespace fingen::nn {

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size()) throw ShapeError("Adam: gradient and parameter sizes differ");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw ShapeError("Adam: optimizer state does not match parameters");
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= config.step_size * mhat / (std::sqrt(vhat) + config.eps);
  }
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grads) g *= s;
  }
  return norm;
}

nlohmann::json to_json(const AdamState& state) { return {{"step", state.step}, {"m", state.m}, {"v", state.v}}; }

AdamState adam_state_from_json(const nlohmann::json& doc) {
  AdamState s;
  s.step = doc.at("step").get<long>();
  s.m = doc.at("m").get<std::vector<double>>();
  s.v = doc.at("v").get<std::vector<double>>();
  if (s.m.size() != s.v.size()) throw ParseError("Adam state moments differ in length");
  return s;
}

}  // namespace fingen::nn
