#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fingen::nn {

// Dense row-major array. The first dimension is the batch for network I/O.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape_, double fill = 0.0);
  Tensor(std::vector<int> shape_, std::vector<double> values);  // throws ShapeError on size mismatch

  static std::size_t volume(const std::vector<int>& shape);
  std::size_t size() const { return data.size(); }
  int dim(std::size_t k) const { return shape.at(k); }
  int batch() const { return shape.empty() ? 0 : shape[0]; }
  // Elements per batch entry.
  std::size_t stride() const;

  double* row(int b) { return data.data() + static_cast<std::size_t>(b) * stride(); }
  const double* row(int b) const { return data.data() + static_cast<std::size_t>(b) * stride(); }

  bool all_finite() const;
  std::string shape_string() const;
};

}  // namespace fingen::nn
