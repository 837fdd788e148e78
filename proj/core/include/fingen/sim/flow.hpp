#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fingen/geometry/design_space.hpp"

namespace fingen::sim {

// Nondimensional flow and thermal conditions. Viscosity is u0 H / Re with the
// domain height H as length scale; thermal diffusivity is viscosity / Pr.
struct FlowConditions {
  double reynolds = 100.0;
  double prandtl = 0.05;
  double inlet_speed = 1.0;
  double inlet_temperature = 300.0;
  double solid_temperature = 450.0;

  void validate() const;  // throws InputError
};

enum class PoissonMethod { direct, sor };

struct SolverConfig {
  double safety = 0.5;
  // Final time = multiplier * L / u0; averages taken over the final half.
  double final_time_multiplier = 2.0;
  PoissonMethod poisson = PoissonMethod::direct;
  double poisson_tolerance = 1e-6;  // max |discrete divergence| after projection
  int poisson_max_iterations = 10000;
  double dp_floor = 1e-6;
  double divergence_penalty = 0.0;  // reward reported for failed runs
  bool keep_temperature_snapshot = false;
};

inline constexpr int kDefaultResolution = 64;

// Staggered Cartesian fields on nx x ny cells of size h.
//   u(i, j): x-velocity on the west face of cell i, i = 0..nx (face nx is the outlet)
//   v(i, j): y-velocity on the south face of cell j, j = 0..ny-1 (periodic)
//   p, T, solid: cell centered
struct FieldGrid {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> p;
  std::vector<double> T;
  std::vector<std::uint8_t> solid;
  std::vector<double> inflow;  // inlet x-velocity per row

  double length() const { return nx * h; }
  double height() const { return ny * h; }

  double& U(int i, int j) { return u[static_cast<std::size_t>(wrap(j)) * (nx + 1) + i]; }
  double U(int i, int j) const { return u[static_cast<std::size_t>(wrap(j)) * (nx + 1) + i]; }
  double& V(int i, int j) { return v[static_cast<std::size_t>(wrap(j)) * nx + i]; }
  double V(int i, int j) const { return v[static_cast<std::size_t>(wrap(j)) * nx + i]; }
  double& P(int i, int j) { return p[static_cast<std::size_t>(wrap(j)) * nx + i]; }
  double P(int i, int j) const { return p[static_cast<std::size_t>(wrap(j)) * nx + i]; }
  double& Temp(int i, int j) { return T[static_cast<std::size_t>(wrap(j)) * nx + i]; }
  double Temp(int i, int j) const { return T[static_cast<std::size_t>(wrap(j)) * nx + i]; }
  bool is_solid(int i, int j) const { return solid[static_cast<std::size_t>(wrap(j)) * nx + i] != 0; }
  int wrap(int j) const { return j < 0 ? j + ny : (j >= ny ? j - ny : j); }

  double solid_fraction() const;
};

// Uniform-inflow grid with the given solid mask (row-major, row 0 at y = 0).
// Fluid pockets with no path to the outlet are absorbed into the solid.
FieldGrid make_grid(int nx, int ny, double h, std::vector<std::uint8_t> solid,
                    const FlowConditions& conditions);

// Solid mask from the rasterized design at `resolution` cells per unit
// length. Throws PreconditionError for a design that fails validation and
// ResolutionError when a shape is empty at this resolution or contains a
// neck thinner than two cells.
FieldGrid build_grid(const geometry::DesignSpace& space, int resolution,
                     const FlowConditions& conditions = {});

// safety * min(h / max|velocity|, h^2 / (4 nu), h^2 / (4 alpha)), with
// max|velocity| = max|u| + max|v| over all faces (u0 when the field is at rest).
double cfl_timestep(const FieldGrid& grid, const FlowConditions& conditions, double safety = 0.5);

struct StepReport {
  bool converged = true;
  int poisson_iterations = 0;
  double max_divergence = 0.0;
};

// Projection-method integrator that owns its grid. The pressure operator only
// depends on the solid mask, so it is assembled (and factorized for the
// direct method) once.
class FlowSolver {
 public:
  FlowSolver(FieldGrid grid, FlowConditions conditions, SolverConfig config = {});
  ~FlowSolver();
  FlowSolver(FlowSolver&&) noexcept;
  FlowSolver& operator=(FlowSolver&&) noexcept;

  // Advect and diffuse velocities, project onto discretely divergence-free
  // fields, then advect and diffuse temperature with the start-of-step
  // velocities.
  StepReport step(double dt);

  const FieldGrid& fields() const { return grid_; }
  const FlowConditions& conditions() const { return conditions_; }
  double viscosity() const { return viscosity_; }
  double diffusivity() const { return diffusivity_; }

 private:
  struct PressureSystem;

  void update_velocity(double dt);
  StepReport project(double dt);
  void update_temperature(double dt);

  FieldGrid grid_;
  FlowConditions conditions_;
  SolverConfig config_;
  double viscosity_ = 0.0;
  double diffusivity_ = 0.0;
  std::vector<std::uint8_t> u_fixed_;
  std::vector<std::uint8_t> v_fixed_;
  std::vector<double> u_old_;
  std::vector<double> v_old_;
  std::vector<double> t_next_;
  std::unique_ptr<PressureSystem> pressure_;
};

// One step on a copy of `grid` (assembles a fresh pressure operator).
FieldGrid step(const FieldGrid& grid, const FlowConditions& conditions, double dt,
               const SolverConfig& config = {}, StepReport* report = nullptr);

// Maximum |div u| over fluid cells.
double max_divergence(const FieldGrid& grid);

// Bulk enthalpy flux difference, outlet minus inlet, divided by u0 H (T_s - T_in).
double compute_heat_transfer(const FieldGrid& grid, const FlowConditions& conditions);

// Mean inlet face pressure minus mean outlet face pressure (outlet is the
// zero reference) in units of rho u0^2, before the floor.
double raw_pressure_drop(const FieldGrid& grid, const FlowConditions& conditions);
double compute_pressure_drop(const FieldGrid& grid, const FlowConditions& conditions, double floor = 1e-6);

// Q / Dp^(1/3).
double reward_from(double heat_transfer, double pressure_drop);

struct SimulationResult {
  double heat_transfer = 0.0;  // Q
  double pressure_drop = 0.0;  // Dp, floored
  double reward = 0.0;
  long steps = 0;
  double wall_time = 0.0;
  bool diverged = false;
  std::string failure;  // empty on success
  int nx = 0;
  int ny = 0;
  std::optional<std::vector<double>> temperature;  // final T, row-major
};

// Runs to t_f = multiplier * L / u0 and time-averages Q and Dp over
// [t_f / 2, t_f]. Never throws on solver or geometry failure: the result is
// flagged diverged and carries config.divergence_penalty as reward.
SimulationResult run_simulation(const geometry::DesignSpace& space, const FlowConditions& conditions,
                                int resolution = kDefaultResolution, const SolverConfig& config = {});

// Same as run_simulation on an already built grid.
SimulationResult run_grid(FieldGrid grid, const FlowConditions& conditions, const SolverConfig& config = {});

}  // namespace fingen::sim
