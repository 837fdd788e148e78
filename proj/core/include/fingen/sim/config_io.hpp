#pragma once

#include <nlohmann/json.hpp>

#include "fingen/sim/flow.hpp"

namespace fingen::sim {

nlohmann::json to_json(const FlowConditions& conditions);
// Missing keys keep the defaults; throws ConfigError on bad values.
FlowConditions flow_conditions_from_json(const nlohmann::json& doc, FlowConditions defaults = {});

nlohmann::json to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const nlohmann::json& doc, SolverConfig defaults = {});

}  // namespace fingen::sim
