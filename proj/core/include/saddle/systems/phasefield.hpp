#pragma once

#include <iosfwd>
#include <vector>

#include "saddle/force_model.hpp"
#include "saddle/linalg.hpp"
#include "saddle/sequential_learner.hpp"

namespace saddle::systems {

/**
 * @brief Nonlocal Allen-Cahn type model on (-1, 1) with zero exterior data:
 * F(u) = -kappa ((-Delta)^{alpha/2} u + inv_eta_sq (u - 1)(u - 1/2) u).
 *
 * Unknowns are the interior nodes x_j = -1 + (j + 1) h, j = 0 .. 2/h - 2.
 */
struct PhaseFieldConfig {
  double alpha = 1.5;
  double h = 1.0 / 32.0;
  double kappa = 0.02;
  double inv_eta_sq = 30.0;

  [[nodiscard]] int interior_nodes() const;
  [[nodiscard]] Vector grid() const;
  void validate() const;
};

/// Fractional centered-difference weights w_0 .. w_{count-1}:
/// w_j = (-1)^j Gamma(alpha+1) / (Gamma(alpha/2 - j + 1) Gamma(alpha/2 + j + 1)).
std::vector<double> fractional_weights(double alpha, int count);

/// Toeplitz matrix A_ij = h^{-alpha} w_{|i-j|}, truncated to interior nodes.
SymmetricMatrix frac_laplacian_matrix(const PhaseFieldConfig& cfg);

Vector phasefield_force(const Vector& u, const PhaseFieldConfig& cfg, const SymmetricMatrix& a);

/// -kappa (A + inv_eta_sq diag(3u^2 - 3u + 1/2))
SymmetricMatrix phasefield_jacobian(const Vector& u, const PhaseFieldConfig& cfg, const SymmetricMatrix& a);

/// u_0(x) = 0.5 (1 - x^2) on the interior grid.
Vector phasefield_initial_profile(const PhaseFieldConfig& cfg);

class PhaseFieldOracle final : public ForceOracle {
 public:
  explicit PhaseFieldOracle(PhaseFieldConfig cfg);

  [[nodiscard]] const PhaseFieldConfig& config() const { return cfg_; }
  [[nodiscard]] const SymmetricMatrix& operator_matrix() const { return a_; }
  [[nodiscard]] SymmetricMatrix jacobian(const Vector& u) const { return phasefield_jacobian(u, cfg_, a_); }

 protected:
  Vector compute(const Vector& u) override { return phasefield_force(u, cfg_, a_); }

 private:
  PhaseFieldConfig cfg_;
  SymmetricMatrix a_;
};

/// Smooth training curves: center + sum_{q=1..modes} c_q sin(q pi (x+1)/2),
/// scaled to a stratified fraction of the half-width and clipped to the region.
RegionSampler smooth_curve_sampler(const PhaseFieldConfig& cfg, int modes = 6);

/// Dense matrix as CSV, one row per line, 17 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& m);

}  // namespace saddle::systems
