#include "fingen/nn/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "fingen/errors.hpp"

namespace fingen::nn {

std::size_t Tensor::volume(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape_, double fill) : shape(std::move(shape_)), data(volume(shape), fill) {}

Tensor::Tensor(std::vector<int> shape_, std::vector<double> values) : shape(std::move(shape_)), data(std::move(values)) {
  if (data.size() != volume(shape)) {
    throw ShapeError("tensor of shape " + shape_string() + " given " + std::to_string(data.size()) + " values");
  }
}

std::size_t Tensor::stride() const {
  if (shape.empty()) return 0;
  return volume(std::vector<int>(shape.begin() + 1, shape.end()));
}

bool Tensor::all_finite() const {
  for (double x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t k = 0; k < shape.size(); ++k) s += (k ? "," : "") + std::to_string(shape[k]);
  return s + "]";
}

}  // namespace fingen::nn
