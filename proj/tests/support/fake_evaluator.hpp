#pragma once

// Cheap deterministic stand-in for the flow solver: Q grows with the total
// enclosed area and Dp with the total frontal height.

#include <algorithm>
#include <cmath>

#include "fingen/rl/fin_env.hpp"

namespace fingen::testing {

class AreaEvaluator final : public rl::Evaluator {
 public:
  rl::Evaluation evaluate(const geometry::DesignSpace& space) const override {
    double area = 0.0;
    double frontal = 0.0;
    for (const auto& s : space.shapes) {
      area += s.area();
      double lo = 1e9;
      double hi = -1e9;
      for (const auto& p : s.sample(16)) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
      }
      frontal += hi - lo;
    }
    rl::Evaluation e;
    e.heat_transfer = 10.0 * area;
    e.pressure_drop = 0.1 + frontal;
    e.reward = e.heat_transfer / std::cbrt(e.pressure_drop);
    return e;
  }
  std::string name() const override { return "area"; }
};

}  // namespace fingen::testing
