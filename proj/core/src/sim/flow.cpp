#include "fingen/sim/flow.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "fingen/errors.hpp"
#include "fingen/geometry/raster.hpp"

namespace fingen::sim {

void FlowConditions::validate() const {
  if (!(reynolds > 0.0)) throw InputError("Reynolds number must be positive");
  if (!(prandtl > 0.0)) throw InputError("Prandtl number must be positive");
  if (!(inlet_speed > 0.0)) throw InputError("inlet speed must be positive");
  if (!(solid_temperature > inlet_temperature)) {
    throw InputError("solid temperature must exceed inlet temperature");
  }
}

double FieldGrid::solid_fraction() const {
  const auto n = std::count(solid.begin(), solid.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(solid.size());
}

namespace {

// Fluid cells connected to the outlet column through fluid faces.
std::vector<std::uint8_t> outlet_connected(int nx, int ny, const std::vector<std::uint8_t>& solid) {
  std::vector<std::uint8_t> seen(solid.size(), 0);
  std::deque<int> queue;
  for (int j = 0; j < ny; ++j) {
    const int c = j * nx + (nx - 1);
    if (!solid[c]) {
      seen[c] = 1;
      queue.push_back(c);
    }
  }
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    const int i = c % nx;
    const int j = c / nx;
    const int nbrs[4][2] = {{i + 1, j}, {i - 1, j}, {i, (j + 1) % ny}, {i, (j + ny - 1) % ny}};
    for (const auto& nb : nbrs) {
      if (nb[0] < 0 || nb[0] >= nx) continue;
      const int n = nb[1] * nx + nb[0];
      if (!solid[n] && !seen[n]) {
        seen[n] = 1;
        queue.push_back(n);
      }
    }
  }
  return seen;
}

int count_components(int nx, int ny, const std::vector<std::uint8_t>& cells) {
  std::vector<std::uint8_t> seen(cells.size(), 0);
  int components = 0;
  for (std::size_t start = 0; start < cells.size(); ++start) {
    if (!cells[start] || seen[start]) continue;
    ++components;
    std::deque<int> queue{static_cast<int>(start)};
    seen[start] = 1;
    while (!queue.empty()) {
      const int c = queue.front();
      queue.pop_front();
      const int i = c % nx;
      const int j = c / nx;
      const int nbrs[4][2] = {{i + 1, j}, {i - 1, j}, {i, (j + 1) % ny}, {i, (j + ny - 1) % ny}};
      for (const auto& nb : nbrs) {
        if (nb[0] < 0 || nb[0] >= nx) continue;
        const int n = nb[1] * nx + nb[0];
        if (cells[n] && !seen[n]) {
          seen[n] = 1;
          queue.push_back(n);
        }
      }
    }
  }
  return components;
}

// Union of all fully solid 2x2 blocks (morphological opening).
std::vector<std::uint8_t> opening_2x2(int nx, int ny, const std::vector<std::uint8_t>& cells) {
  std::vector<std::uint8_t> out(cells.size(), 0);
  for (int j = 0; j < ny; ++j) {
    const int j1 = (j + 1) % ny;
    for (int i = 0; i + 1 < nx; ++i) {
      if (cells[j * nx + i] && cells[j * nx + i + 1] && cells[j1 * nx + i] && cells[j1 * nx + i + 1]) {
        out[j * nx + i] = out[j * nx + i + 1] = out[j1 * nx + i] = out[j1 * nx + i + 1] = 1;
      }
    }
  }
  return out;
}

}  // namespace

FieldGrid make_grid(int nx, int ny, double h, std::vector<std::uint8_t> solid,
                    const FlowConditions& conditions) {
  conditions.validate();
  if (nx < 2 || ny < 2 || !(h > 0.0)) throw InputError("grid needs at least 2x2 cells and positive spacing");
  if (solid.size() != static_cast<std::size_t>(nx) * ny) throw InputError("solid mask size mismatch");

  const auto connected = outlet_connected(nx, ny, solid);
  for (std::size_t c = 0; c < solid.size(); ++c) {
    if (!solid[c] && !connected[c]) solid[c] = 1;
  }

  FieldGrid g;
  g.nx = nx;
  g.ny = ny;
  g.h = h;
  g.solid = std::move(solid);
  g.u.assign(static_cast<std::size_t>(nx + 1) * ny, 0.0);
  g.v.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  g.p.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  g.T.assign(static_cast<std::size_t>(nx) * ny, conditions.inlet_temperature);
  g.inflow.assign(ny, conditions.inlet_speed);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const bool blocked = (i > 0 && g.is_solid(i - 1, j)) || (i < nx && g.is_solid(i, j));
      g.U(i, j) = blocked ? 0.0 : conditions.inlet_speed;
    }
    for (int i = 0; i < nx; ++i) {
      if (g.is_solid(i, j)) g.Temp(i, j) = conditions.solid_temperature;
    }
  }
  return g;
}

FieldGrid build_grid(const geometry::DesignSpace& space, int resolution, const FlowConditions& conditions) {
  if (resolution < 4) throw InputError("resolution must be at least 4 cells per unit length");
  const int nx = static_cast<int>(std::lround(space.length * resolution));
  const int ny = static_cast<int>(std::lround(space.height * resolution));
  geometry::ValidationOptions options;
  options.margin = 1.0 / resolution;
  const auto raster = geometry::rasterize_mask(space, nx, ny, options);

  for (std::size_t s = 0; s < space.shapes.size(); ++s) {
    geometry::DesignSpace single;
    single.length = space.length;
    single.height = space.height;
    single.shapes.push_back(space.shapes[s]);
    const auto own = geometry::rasterize_unchecked(single, nx, ny).pixels;
    if (std::count(own.begin(), own.end(), std::uint8_t{1}) == 0) {
      throw ResolutionError("shape " + std::to_string(s) + " covers no cell at this resolution");
    }
    if (count_components(nx, ny, own) != 1) {
      throw ResolutionError("shape " + std::to_string(s) + " breaks apart at this resolution");
    }
    if (count_components(nx, ny, opening_2x2(nx, ny, own)) != 1) {
      throw ResolutionError("shape " + std::to_string(s) + " has a neck thinner than two cells");
    }
  }
  return make_grid(nx, ny, space.length / nx, raster.pixels, conditions);
}

double cfl_timestep(const FieldGrid& grid, const FlowConditions& conditions, double safety) {
  double max_u = 0.0;
  double max_v = 0.0;
  for (double x : grid.u) max_u = std::max(max_u, std::abs(x));
  for (double x : grid.v) max_v = std::max(max_v, std::abs(x));
  double speed = max_u + max_v;
  if (!(speed > 0.0)) speed = conditions.inlet_speed;
  const double nu = conditions.inlet_speed * grid.height() / conditions.reynolds;
  const double alpha = nu / conditions.prandtl;
  const double h = grid.h;
  return safety * std::min({h / speed, h * h / (4.0 * nu), h * h / (4.0 * alpha)});
}

// Pressure unknowns are the fluid cells. The operator is -h^2 times the
// discrete Laplacian restricted to free faces, with p = 0 on the outlet faces.
struct FlowSolver::PressureSystem {
  std::vector<int> cell_of;    // unknown -> cell
  std::vector<int> index_of;   // cell -> unknown or -1
  std::vector<double> diag;
  std::vector<std::array<int, 4>> nbr;  // unknown indices, -1 where absent
  std::vector<std::uint8_t> color;
  Eigen::SparseMatrix<double> matrix;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool factorized = false;
  Eigen::VectorXd rhs;
  Eigen::VectorXd solution;
};

FlowSolver::FlowSolver(FieldGrid grid, FlowConditions conditions, SolverConfig config)
    : grid_(std::move(grid)), conditions_(conditions), config_(config) {
  conditions_.validate();
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  viscosity_ = conditions_.inlet_speed * grid_.height() / conditions_.reynolds;
  diffusivity_ = viscosity_ / conditions_.prandtl;

  u_fixed_.assign(grid_.u.size(), 0);
  v_fixed_.assign(grid_.v.size(), 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const bool blocked = (i > 0 && grid_.is_solid(i - 1, j)) || (i < nx && grid_.is_solid(i, j));
      u_fixed_[static_cast<std::size_t>(j) * (nx + 1) + i] = (i == 0 || blocked) ? 1 : 0;
      if (i == 0) grid_.U(0, j) = blocked ? 0.0 : grid_.inflow[j];
      if (blocked) grid_.U(i, j) = 0.0;
    }
    for (int i = 0; i < nx; ++i) {
      const bool blocked = grid_.is_solid(i, j - 1) || grid_.is_solid(i, j);
      v_fixed_[static_cast<std::size_t>(j) * nx + i] = blocked ? 1 : 0;
      if (blocked) grid_.V(i, j) = 0.0;
      if (grid_.is_solid(i, j)) grid_.Temp(i, j) = conditions_.solid_temperature;
    }
  }

  pressure_ = std::make_unique<PressureSystem>();
  auto& ps = *pressure_;
  ps.index_of.assign(static_cast<std::size_t>(nx) * ny, -1);
  for (int c = 0; c < nx * ny; ++c) {
    if (!grid_.solid[c]) {
      ps.index_of[c] = static_cast<int>(ps.cell_of.size());
      ps.cell_of.push_back(c);
    }
  }
  const int n = static_cast<int>(ps.cell_of.size());
  ps.diag.assign(n, 0.0);
  ps.nbr.assign(n, {-1, -1, -1, -1});
  ps.color.assign(n, 0);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * 5);
  for (int k = 0; k < n; ++k) {
    const int c = ps.cell_of[k];
    const int i = c % nx;
    const int j = c / nx;
    ps.color[k] = static_cast<std::uint8_t>((i + j) & 1);
    auto link = [&](int slot, int cell) {
      const int m = ps.index_of[cell];
      ps.nbr[k][slot] = m;
      ps.diag[k] += 1.0;
      triplets.emplace_back(k, m, -1.0);
    };
    // east
    if (i + 1 == nx) {
      if (!u_fixed_[static_cast<std::size_t>(j) * (nx + 1) + nx]) ps.diag[k] += 2.0;
    } else if (!u_fixed_[static_cast<std::size_t>(j) * (nx + 1) + i + 1]) {
      link(0, j * nx + i + 1);
    }
    // west (the inlet face is always fixed)
    if (i > 0 && !u_fixed_[static_cast<std::size_t>(j) * (nx + 1) + i]) link(1, j * nx + i - 1);
    // north / south, periodic
    const int jn = grid_.wrap(j + 1);
    const int js = grid_.wrap(j - 1);
    if (!v_fixed_[static_cast<std::size_t>(jn) * nx + i]) link(2, jn * nx + i);
    if (!v_fixed_[static_cast<std::size_t>(j) * nx + i]) link(3, js * nx + i);
    triplets.emplace_back(k, k, ps.diag[k]);
  }
  ps.rhs = Eigen::VectorXd::Zero(n);
  ps.solution = Eigen::VectorXd::Zero(n);
  if (config_.poisson == PoissonMethod::direct && n > 0) {
    ps.matrix.resize(n, n);
    ps.matrix.setFromTriplets(triplets.begin(), triplets.end());
    ps.ldlt.compute(ps.matrix);
    if (ps.ldlt.info() != Eigen::Success) throw Error("pressure operator factorization failed");
    ps.factorized = true;
  }

  u_old_.resize(grid_.u.size());
  v_old_.resize(grid_.v.size());
  t_next_.resize(grid_.T.size());
}

FlowSolver::~FlowSolver() = default;
FlowSolver::FlowSolver(FlowSolver&&) noexcept = default;
FlowSolver& FlowSolver::operator=(FlowSolver&&) noexcept = default;

StepReport FlowSolver::step(double dt) {
  if (!(dt > 0.0)) throw InputError("time step must be positive");
  u_old_ = grid_.u;
  v_old_ = grid_.v;
  update_velocity(dt);
  const StepReport report = project(dt);
  update_temperature(dt);
  return report;
}

void FlowSolver::update_velocity(double dt) {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const double h = grid_.h;
  const double inv_h = 1.0 / h;
  const double inv_h2 = inv_h * inv_h;
  const double nu = viscosity_;
  const auto& g = grid_;
  auto uo = [&](int i, int j) { return u_old_[static_cast<std::size_t>(g.wrap(j)) * (nx + 1) + i]; };
  auto vo = [&](int i, int j) { return v_old_[static_cast<std::size_t>(g.wrap(j)) * nx + i]; };
  auto u_fixed = [&](int i, int j) { return u_fixed_[static_cast<std::size_t>(g.wrap(j)) * (nx + 1) + i] != 0; };
  auto v_fixed = [&](int i, int j) { return v_fixed_[static_cast<std::size_t>(g.wrap(j)) * nx + i] != 0; };

  // Tangential neighbour across a blocked face: a full wall row mirrors the
  // velocity (no-slip on the shared face), a partial one holds zero.
  auto u_neighbor = [&](int i, int jn, double uc) {
    if (!u_fixed(i, jn)) return uo(i, jn);
    if (g.is_solid(i - 1, jn) && g.is_solid(i, jn)) return -uc;
    return 0.0;
  };
  auto v_neighbor = [&](int in, int j, double vc) {
    if (!v_fixed(in, j)) return vo(in, j);
    if (g.is_solid(in, j - 1) && g.is_solid(in, j)) return -vc;
    return 0.0;
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      if (u_fixed(i, j)) continue;
      const double uc = uo(i, j);
      const double ue = uo(i + 1, j);
      const double uw = uo(i - 1, j);
      const double un = u_neighbor(i, j + 1, uc);
      const double us = u_neighbor(i, j - 1, uc);
      const double vt = 0.5 * (vo(i - 1, j + 1) + vo(i, j + 1));
      const double vb = 0.5 * (vo(i - 1, j) + vo(i, j));
      const double ae = 0.5 * (uc + ue);
      const double aw = 0.5 * (uw + uc);
      const double du2dx = inv_h * (ae * ae - aw * aw + std::abs(ae) * 0.5 * (uc - ue) - std::abs(aw) * 0.5 * (uw - uc));
      const double duvdy = inv_h * (vt * 0.5 * (uc + un) - vb * 0.5 * (us + uc) + std::abs(vt) * 0.5 * (uc - un) -
                                    std::abs(vb) * 0.5 * (us - uc));
      const double lap = (ue + uw + un + us - 4.0 * uc) * inv_h2;
      grid_.U(i, j) = uc + dt * (nu * lap - du2dx - duvdy);
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (v_fixed(i, j)) continue;
      const double vc = vo(i, j);
      const double vn = vo(i, j + 1);
      const double vs = vo(i, j - 1);
      const double ve = i + 1 < nx ? v_neighbor(i + 1, j, vc) : vc;
      const double vw = i > 0 ? v_neighbor(i - 1, j, vc) : -vc;
      const double ur = 0.5 * (uo(i + 1, j - 1) + uo(i + 1, j));
      const double ul = 0.5 * (uo(i, j - 1) + uo(i, j));
      const double an = 0.5 * (vc + vn);
      const double as = 0.5 * (vs + vc);
      const double duvdx = inv_h * (ur * 0.5 * (vc + ve) - ul * 0.5 * (vw + vc) + std::abs(ur) * 0.5 * (vc - ve) -
                                    std::abs(ul) * 0.5 * (vw - vc));
      const double dv2dy = inv_h * (an * an - as * as + std::abs(an) * 0.5 * (vc - vn) - std::abs(as) * 0.5 * (vs - vc));
      const double lap = (ve + vw + vn + vs - 4.0 * vc) * inv_h2;
      grid_.V(i, j) = vc + dt * (nu * lap - duvdx - dv2dy);
    }
  }
  // Zero-gradient outflow before projection.
  for (int j = 0; j < ny; ++j) {
    grid_.U(nx, j) = u_fixed(nx, j) ? 0.0 : grid_.U(nx - 1, j);
  }
}

StepReport FlowSolver::project(double dt) {
  StepReport report;
  auto& ps = *pressure_;
  const int nx = grid_.nx;
  const double h = grid_.h;
  const int n = static_cast<int>(ps.cell_of.size());
  for (int k = 0; k < n; ++k) {
    const int c = ps.cell_of[k];
    const int i = c % nx;
    const int j = c / nx;
    const double flux = grid_.U(i + 1, j) - grid_.U(i, j) + grid_.V(i, j + 1) - grid_.V(i, j);
    ps.rhs[k] = -h * flux / dt;
  }

  auto residual_divergence = [&]() {
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      double ap = ps.diag[k] * ps.solution[k];
      for (int m : ps.nbr[k]) {
        if (m >= 0) ap -= ps.solution[m];
      }
      worst = std::max(worst, std::abs(ap - ps.rhs[k]));
    }
    return worst * dt / (h * h);
  };

  if (config_.poisson == PoissonMethod::direct) {
    if (n > 0) ps.solution = ps.ldlt.solve(ps.rhs);
    report.poisson_iterations = 1;
  } else {
    const int longest = std::max(nx, grid_.ny);
    const double omega = 2.0 / (1.0 + std::sin(3.14159265358979323846 / longest));
    const double target = 0.5 * config_.poisson_tolerance;
    report.converged = false;
    for (int it = 1; it <= config_.poisson_max_iterations; ++it) {
      for (std::uint8_t color = 0; color < 2; ++color) {
        for (int k = 0; k < n; ++k) {
          if (ps.color[k] != color) continue;
          double sum = ps.rhs[k];
          for (int m : ps.nbr[k]) {
            if (m >= 0) sum += ps.solution[m];
          }
          ps.solution[k] += omega * (sum / ps.diag[k] - ps.solution[k]);
        }
      }
      report.poisson_iterations = it;
      if ((it % 8 == 0 || it == config_.poisson_max_iterations) && residual_divergence() < target) {
        report.converged = true;
        break;
      }
    }
  }

  for (int k = 0; k < n; ++k) grid_.p[ps.cell_of[k]] = ps.solution[k];

  const int ny = grid_.ny;
  const double scale = dt / h;
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      if (!u_fixed_[static_cast<std::size_t>(j) * (nx + 1) + i]) {
        grid_.U(i, j) -= scale * (grid_.P(i, j) - grid_.P(i - 1, j));
      }
    }
    if (!u_fixed_[static_cast<std::size_t>(j) * (nx + 1) + nx]) {
      grid_.U(nx, j) += scale * 2.0 * grid_.P(nx - 1, j);
    }
    for (int i = 0; i < nx; ++i) {
      if (!v_fixed_[static_cast<std::size_t>(j) * nx + i]) {
        grid_.V(i, j) -= scale * (grid_.P(i, j) - grid_.P(i, j - 1));
      }
    }
  }
  report.max_divergence = max_divergence(grid_);
  if (!std::isfinite(report.max_divergence) || report.max_divergence > config_.poisson_tolerance) {
    report.converged = false;
  }
  return report;
}

void FlowSolver::update_temperature(double dt) {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const double inv_h = 1.0 / grid_.h;
  const double inv_h2 = inv_h * inv_h;
  const double alpha = diffusivity_;
  const double t_in = conditions_.inlet_temperature;
  const auto& g = grid_;
  for (int j = 0; j < ny; ++j) {
    const int jn = g.wrap(j + 1);
    const int js = g.wrap(j - 1);
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * nx + i;
      if (g.solid[c]) {
        t_next_[c] = conditions_.solid_temperature;
        continue;
      }
      const double uc = 0.5 * (u_old_[static_cast<std::size_t>(j) * (nx + 1) + i] +
                               u_old_[static_cast<std::size_t>(j) * (nx + 1) + i + 1]);
      const double vc = 0.5 * (v_old_[c] + v_old_[static_cast<std::size_t>(jn) * nx + i]);
      const double tc = g.T[c];
      const double tw = i > 0 ? g.T[c - 1] : t_in;
      const double te = i + 1 < nx ? g.T[c + 1] : tc;
      const double tn = g.T[static_cast<std::size_t>(jn) * nx + i];
      const double ts = g.T[static_cast<std::size_t>(js) * nx + i];
      const double adv_x = uc > 0.0 ? uc * (tc - tw) : uc * (te - tc);
      const double adv_y = vc > 0.0 ? vc * (tc - ts) : vc * (tn - tc);
      const double lap = (tw + te + tn + ts - 4.0 * tc) * inv_h2;
      t_next_[c] = tc + dt * (alpha * lap - (adv_x + adv_y) * inv_h);
    }
  }
  grid_.T.swap(t_next_);
}

FieldGrid step(const FieldGrid& grid, const FlowConditions& conditions, double dt, const SolverConfig& config,
               StepReport* report) {
  FlowSolver solver(grid, conditions, config);
  const StepReport r = solver.step(dt);
  if (report) *report = r;
  return solver.fields();
}

double max_divergence(const FieldGrid& grid) {
  double worst = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (grid.is_solid(i, j)) continue;
      const double div = (grid.U(i + 1, j) - grid.U(i, j) + grid.V(i, j + 1) - grid.V(i, j)) / grid.h;
      if (!std::isfinite(div)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::abs(div));
    }
  }
  return worst;
}

double compute_heat_transfer(const FieldGrid& grid, const FlowConditions& conditions) {
  double outflow = 0.0;
  double inflow = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    outflow += grid.U(grid.nx, j) * grid.Temp(grid.nx - 1, j) * grid.h;
    inflow += grid.U(0, j) * conditions.inlet_temperature * grid.h;
  }
  const double scale =
      conditions.inlet_speed * grid.height() * (conditions.solid_temperature - conditions.inlet_temperature);
  return (outflow - inflow) / scale;
}

double raw_pressure_drop(const FieldGrid& grid, const FlowConditions& conditions) {
  double sum = 0.0;
  int rows = 0;
  for (int j = 0; j < grid.ny; ++j) {
    if (grid.is_solid(0, j)) continue;
    const double p0 = grid.P(0, j);
    const double face = (grid.nx > 1 && !grid.is_solid(1, j)) ? 1.5 * p0 - 0.5 * grid.P(1, j) : p0;
    sum += face;
    ++rows;
  }
  const double inlet = rows > 0 ? sum / rows : 0.0;
  const double u0 = conditions.inlet_speed;
  return inlet / (u0 * u0);
}

double compute_pressure_drop(const FieldGrid& grid, const FlowConditions& conditions, double floor) {
  return std::max(raw_pressure_drop(grid, conditions), floor);
}

double reward_from(double heat_transfer, double pressure_drop) { return heat_transfer / std::cbrt(pressure_drop); }

SimulationResult run_grid(FieldGrid grid, const FlowConditions& conditions, const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  SimulationResult result;
  result.nx = grid.nx;
  result.ny = grid.ny;
  auto fail = [&](std::string why) {
    result.diverged = true;
    result.failure = std::move(why);
    result.reward = config.divergence_penalty;
  };

  try {
    FlowSolver solver(std::move(grid), conditions, config);
    const double t_final = config.final_time_multiplier * solver.fields().length() / conditions.inlet_speed;
    const double t_half = 0.5 * t_final;
    double t = 0.0;
    double q_sum = 0.0;
    double dp_sum = 0.0;
    double weight = 0.0;
    while (t_final - t > 1e-12 * t_final) {
      const double dt = std::min(cfl_timestep(solver.fields(), conditions, config.safety), t_final - t);
      const StepReport report = solver.step(dt);
      ++result.steps;
      if (!report.converged) {
        fail(std::isfinite(report.max_divergence) ? "pressure solve did not reach tolerance" : "non-finite velocity");
        break;
      }
      const double t_next = t + dt;
      if (t_next > t_half) {
        const double w = t_next - std::max(t, t_half);
        q_sum += w * compute_heat_transfer(solver.fields(), conditions);
        dp_sum += w * raw_pressure_drop(solver.fields(), conditions);
        weight += w;
      }
      t = t_next;
    }
    if (!result.diverged) {
      result.heat_transfer = q_sum / weight;
      result.pressure_drop = std::max(dp_sum / weight, config.dp_floor);
      if (!std::isfinite(result.heat_transfer) || !std::isfinite(result.pressure_drop)) {
        fail("non-finite averages");
      } else {
        result.reward = reward_from(result.heat_transfer, result.pressure_drop);
      }
    }
    if (config.keep_temperature_snapshot) result.temperature = solver.fields().T;
  } catch (const Error& e) {
    fail(e.what());
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SimulationResult run_simulation(const geometry::DesignSpace& space, const FlowConditions& conditions, int resolution,
                                const SolverConfig& config) {
  try {
    return run_grid(build_grid(space, resolution, conditions), conditions, config);
  } catch (const Error& e) {
    SimulationResult result;
    result.diverged = true;
    result.failure = e.what();
    result.reward = config.divergence_penalty;
    return result;
  }
}

}  // namespace fingen::sim
