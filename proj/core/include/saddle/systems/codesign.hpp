#pragma once

#include <atomic>
#include <cstdint>

#include "saddle/force_model.hpp"

namespace saddle::systems {

/// Uniform grid on [0, t_end]: nodes t_0 .. t_{n_nodes-1}.
struct PlantGrid {
  double t_end = 0.1;
  double mesh = 0.01;
  int n_nodes = 11;
};

struct PlantTrajectory {
  Vector eta;
  Vector xi;
};

/// Forward Euler on d(eta)/dt = -a eta + xi^2, d(xi)/dt = eta - 2a^2 xi - eta^2 + u,
/// eta(0) = xi(0) = 1. `u` holds the control on the grid nodes.
PlantTrajectory simulate_plant(double a, const Vector& u, const PlantGrid& grid = {});

/**
 * @brief Codesign force on x = (a, u(t_0), ..., u(t_10)):
 * F = (a, -xi(t_j)^2 u(t_j)). Every query runs one plant simulation.
 */
class CodesignOracle final : public ForceOracle {
 public:
  explicit CodesignOracle(PlantGrid grid = {});

  /// Number of plant simulations run so far (N_s).
  [[nodiscard]] std::uint64_t simulation_count() const noexcept { return simulations_.load(); }
  [[nodiscard]] const PlantGrid& grid() const { return grid_; }

 protected:
  Vector compute(const Vector& x) override;

 private:
  PlantGrid grid_;
  std::atomic<std::uint64_t> simulations_{0};
};

/// Pure force function (does not touch any counter).
Vector codesign_force(const Vector& x, const PlantGrid& grid = {});

}  // namespace saddle::systems
