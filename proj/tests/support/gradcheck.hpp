#pragma once

// Central finite-difference oracle shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fingen/nn/network.hpp"

namespace fingen::testing {

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

// d f / d x_i by central differences for every coordinate.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, relative_error(a[i], b[i]));
  return worst;
}

struct NetworkCheck {
  double params = 0.0;  // worst relative error over parameters
  double inputs = 0.0;  // worst relative error over inputs
};

// Loss = sum(c * forward(x)) with random c; compares backward() against
// central differences for both parameters and inputs.
inline NetworkCheck check_network(const nn::NetworkSpec& spec, int batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  nn::Network net(spec);
  auto params = net.initial_parameters(rng);
  for (double& p : params) p += 0.1 * normal(rng);  // non-zero biases
  std::vector<int> shape{batch};
  shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
  nn::Tensor x(shape);
  for (double& v : x.data) v = normal(rng);
  nn::ForwardRecord record;
  const auto y = net.forward(params, x, &record);
  nn::Tensor c(y.shape);
  for (double& v : c.data) v = normal(rng);
  auto loss = [&](const std::vector<double>& p, const nn::Tensor& in) {
    const auto out = net.forward(p, in);
    double s = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) s += c.data[i] * out.data[i];
    return s;
  };
  std::vector<double> grads(params.size(), 0.0);
  const auto dx = net.backward(params, record, c, grads);
  NetworkCheck result;
  result.params = max_relative_error(grads, numeric_gradient([&](const std::vector<double>& p) { return loss(p, x); }, params));
  result.inputs = max_relative_error(dx.data, numeric_gradient(
                                                  [&](const std::vector<double>& v) {
                                                    return loss(params, nn::Tensor(x.shape, v));
                                                  },
                                                  x.data));
  return result;
}

// Small randomized specs covering every layer kind.
inline nn::NetworkSpec random_small_spec(std::mt19937_64& rng, int variant) {
  std::uniform_int_distribution<int> small(2, 4);
  nn::NetworkSpec spec;
  switch (variant % 4) {
    case 0:
      spec = nn::NetworkSpec::mlp(small(rng), {small(rng) + 2, small(rng) + 1}, small(rng));
      break;
    case 1:
      spec.input_shape = {small(rng) - 1, 6, 6};
      spec.layers = {nn::LayerSpec::conv(small(rng), 3, 1), nn::LayerSpec::relu(), nn::LayerSpec::maxpool(2),
                     nn::LayerSpec::flatten(), nn::LayerSpec::dense(3)};
      break;
    case 2:
      spec.input_shape = {2, 7, 5};
      spec.layers = {nn::LayerSpec::conv(3, 3, 2), nn::LayerSpec::relu(), nn::LayerSpec::flatten(),
                     nn::LayerSpec::dense(small(rng))};
      break;
    default:
      spec.input_shape = {1, 8, 8};
      spec.layers = {nn::LayerSpec::conv(2, 1, 1), nn::LayerSpec::maxpool(2), nn::LayerSpec::conv(3, 5, 1),
                     nn::LayerSpec::relu(), nn::LayerSpec::maxpool(2), nn::LayerSpec::flatten(),
                     nn::LayerSpec::dense(2)};
      break;
  }
  return spec;
}

}  // namespace fingen::testing
