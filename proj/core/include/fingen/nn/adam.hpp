#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace fingen::nn {

struct AdamConfig {
  double step_size = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

// Bias-corrected Adam step; lazily sizes the state on first use.
void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& config);

// Rescales grads in place so their L2 norm is at most max_norm; returns the
// norm before clipping. max_norm <= 0 disables clipping.
double clip_grad_norm(std::span<double> grads, double max_norm);

nlohmann::json to_json(const AdamState& state);
AdamState adam_state_from_json(const nlohmann::json& doc);

}  // namespace fingen::nn
