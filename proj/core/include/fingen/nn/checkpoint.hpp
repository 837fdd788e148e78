#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "fingen/nn/adam.hpp"
#include "fingen/nn/network.hpp"

namespace fingen::nn {

inline constexpr int kCheckpointVersion = 1;

// One or more networks sharing a flat parameter vector, plus optimizer state
// and free-form metadata.
struct Checkpoint {
  std::vector<NetworkSpec> networks;
  std::vector<double> params;
  AdamState optimizer;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);  // throws ParseError

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fingen::nn
