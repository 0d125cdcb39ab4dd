#include "saddle/systems/codesign.hpp"

#include <cmath>
#include <stdexcept>

#include "saddle/errors.hpp"

namespace saddle::systems {

PlantTrajectory simulate_plant(double a, const Vector& u, const PlantGrid& grid) {
  if (u.size() != grid.n_nodes) throw std::invalid_argument("simulate_plant: control size must equal n_nodes");
  if (std::abs(grid.mesh * (grid.n_nodes - 1) - grid.t_end) > 1e-12) {
    throw std::invalid_argument("simulate_plant: mesh * (n_nodes - 1) must equal t_end");
  }
  PlantTrajectory out{Vector(grid.n_nodes), Vector(grid.n_nodes)};
  out.eta(0) = 1.0;
  out.xi(0) = 1.0;
  const double h = grid.mesh;
  for (int j = 0; j + 1 < grid.n_nodes; ++j) {
    const double eta = out.eta(j);
    const double xi = out.xi(j);
    out.eta(j + 1) = eta + h * (-a * eta + xi * xi);
    out.xi(j + 1) = xi + h * (eta - 2.0 * a * a * xi - eta * eta + u(j));
  }
  if (!out.eta.allFinite() || !out.xi.allFinite()) throw SimulationFailure("simulate_plant: trajectory diverged");
  return out;
}

Vector codesign_force(const Vector& x, const PlantGrid& grid) {
  if (x.size() != grid.n_nodes + 1) throw std::invalid_argument("codesign_force: expected (a, u) of size n_nodes + 1");
  const double a = x(0);
  const Vector u = x.tail(grid.n_nodes);
  const PlantTrajectory traj = simulate_plant(a, u, grid);
  Vector f(x.size());
  f(0) = a;
  f.tail(grid.n_nodes) = -(traj.xi.array().square() * u.array()).matrix();
  return f;
}

CodesignOracle::CodesignOracle(PlantGrid grid)
    : ForceOracle(grid.n_nodes + 1, OracleKind::simulation, false), grid_(grid) {}

Vector CodesignOracle::compute(const Vector& x) {
  simulations_.fetch_add(1);
  return codesign_force(x, grid_);
}

}  // namespace saddle::systems
