#pragma once

#include <string>
#include <vector>

namespace fingen::harness {

struct ParetoRecord {
  std::string design;      // run directory and episode, or a design file
  double q_ratio = 0.0;    // Q / Q_ref
  double dp_ratio = 0.0;   // Dp / Dp_ref
  double reward = 0.0;
  long episode = -1;
};

// Indices of the records no other record dominates (higher or equal Q ratio
// and lower or equal Dp ratio, strictly better in one). Of several identical
// points only the first is kept. Ordered by increasing Dp ratio.
std::vector<std::size_t> pareto_front(const std::vector<ParetoRecord>& records);

// design,episode,q_ratio,dp_ratio,reward,on_front
std::string pareto_csv(const std::vector<ParetoRecord>& records, const std::vector<std::size_t>& front);
// Scatter of every record with the front highlighted and joined.
std::string pareto_svg(const std::vector<ParetoRecord>& records, const std::vector<std::size_t>& front);

}  // namespace fingen::harness
