#include "fingen/sim/config_io.hpp"

#include "fingen/errors.hpp"

namespace fingen::sim {

nlohmann::json to_json(const FlowConditions& c) {
  return {{"reynolds", c.reynolds},
          {"prandtl", c.prandtl},
          {"inlet_speed", c.inlet_speed},
          {"inlet_temperature", c.inlet_temperature},
          {"solid_temperature", c.solid_temperature}};
}

FlowConditions flow_conditions_from_json(const nlohmann::json& doc, FlowConditions c) {
  try {
    c.reynolds = doc.value("reynolds", c.reynolds);
    c.prandtl = doc.value("prandtl", c.prandtl);
    c.inlet_speed = doc.value("inlet_speed", c.inlet_speed);
    c.inlet_temperature = doc.value("inlet_temperature", c.inlet_temperature);
    c.solid_temperature = doc.value("solid_temperature", c.solid_temperature);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad flow conditions: ") + e.what());
  }
  try {
    c.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

nlohmann::json to_json(const SolverConfig& c) {
  return {{"safety", c.safety},
          {"final_time_multiplier", c.final_time_multiplier},
          {"poisson", c.poisson == PoissonMethod::direct ? "direct" : "sor"},
          {"poisson_tolerance", c.poisson_tolerance},
          {"poisson_max_iterations", c.poisson_max_iterations},
          {"dp_floor", c.dp_floor},
          {"divergence_penalty", c.divergence_penalty}};
}

SolverConfig solver_config_from_json(const nlohmann::json& doc, SolverConfig c) {
  try {
    c.safety = doc.value("safety", c.safety);
    c.final_time_multiplier = doc.value("final_time_multiplier", c.final_time_multiplier);
    const std::string method = doc.value("poisson", c.poisson == PoissonMethod::direct ? "direct" : "sor");
    if (method == "direct") {
      c.poisson = PoissonMethod::direct;
    } else if (method == "sor") {
      c.poisson = PoissonMethod::sor;
    } else {
      throw ConfigError("poisson must be direct or sor, got '" + method + "'");
    }
    c.poisson_tolerance = doc.value("poisson_tolerance", c.poisson_tolerance);
    c.poisson_max_iterations = doc.value("poisson_max_iterations", c.poisson_max_iterations);
    c.dp_floor = doc.value("dp_floor", c.dp_floor);
    c.divergence_penalty = doc.value("divergence_penalty", c.divergence_penalty);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad solver setting: ") + e.what());
  }
  if (!(c.safety > 0.0 && c.safety <= 1.0)) throw ConfigError("safety must lie in (0, 1]");
  if (!(c.final_time_multiplier > 0.0)) throw ConfigError("final_time_multiplier must be positive");
  if (!(c.dp_floor > 0.0)) throw ConfigError("dp_floor must be positive");
  return c;
}

}  // namespace fingen::sim
