#include "saddle/systems/phasefield.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace saddle::systems {

int PhaseFieldConfig::interior_nodes() const { return static_cast<int>(std::lround(2.0 / h)) - 1; }

Vector PhaseFieldConfig::grid() const {
  const int n = interior_nodes();
  Vector x(n);
  for (int j = 0; j < n; ++j) x(j) = -1.0 + (j + 1) * h;
  return x;
}

void PhaseFieldConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("PhaseFieldConfig: alpha must lie in (0, 2)");
  if (!(h > 0.0) || std::abs(2.0 / h - std::round(2.0 / h)) > 1e-9 || interior_nodes() < 1) {
    throw std::invalid_argument("PhaseFieldConfig: h must divide 2");
  }
  if (!(kappa > 0.0) || !(inv_eta_sq > 0.0)) throw std::invalid_argument("PhaseFieldConfig: kappa and 1/eta^2 must be positive");
}

std::vector<double> fractional_weights(double alpha, int count) {
  std::vector<double> w(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return w;
  const double half = alpha / 2.0;
  w[0] = std::tgamma(alpha + 1.0) / (std::tgamma(half + 1.0) * std::tgamma(half + 1.0));
  // Ratio of consecutive gamma quotients, stable for large j.
  for (int j = 0; j + 1 < count; ++j) {
    w[static_cast<std::size_t>(j) + 1] = w[static_cast<std::size_t>(j)] * (j - half) / (j + half + 1.0);
  }
  return w;
}

SymmetricMatrix frac_laplacian_matrix(const PhaseFieldConfig& cfg) {
  cfg.validate();
  const int n = cfg.interior_nodes();
  const std::vector<double> w = fractional_weights(cfg.alpha, n);
  const double scale = std::pow(cfg.h, -cfg.alpha);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * w[static_cast<std::size_t>(std::abs(i - j))];
  return SymmetricMatrix(a);
}

Vector phasefield_force(const Vector& u, const PhaseFieldConfig& cfg, const SymmetricMatrix& a) {
  if (u.size() != a.dim()) throw std::invalid_argument("phasefield_force: dimension mismatch");
  const Eigen::ArrayXd v = u.array();
  const Eigen::ArrayXd reaction = (v - 1.0) * (v - 0.5) * v;
  return -cfg.kappa * (a.matrix() * u + cfg.inv_eta_sq * reaction.matrix());
}

SymmetricMatrix phasefield_jacobian(const Vector& u, const PhaseFieldConfig& cfg, const SymmetricMatrix& a) {
  if (u.size() != a.dim()) throw std::invalid_argument("phasefield_jacobian: dimension mismatch");
  const Eigen::ArrayXd v = u.array();
  const Vector diag = (3.0 * v * v - 3.0 * v + 0.5).matrix();
  Matrix j = a.matrix();
  j.diagonal() += cfg.inv_eta_sq * diag;
  return SymmetricMatrix(-cfg.kappa * j);
}

Vector phasefield_initial_profile(const PhaseFieldConfig& cfg) {
  const Vector x = cfg.grid();
  return (0.5 * (1.0 - x.array().square())).matrix();
}

PhaseFieldOracle::PhaseFieldOracle(PhaseFieldConfig cfg)
    : ForceOracle(cfg.interior_nodes(), OracleKind::analytic, true), cfg_(cfg), a_(frac_laplacian_matrix(cfg)) {}

RegionSampler smooth_curve_sampler(const PhaseFieldConfig& cfg, int modes) {
  const Vector x = cfg.grid();
  Matrix basis(x.size(), modes);
  for (int q = 1; q <= modes; ++q) basis.col(q - 1) = (q * std::numbers::pi * (x.array() + 1.0) / 2.0).sin().matrix();

  return [basis](const TrustRegion& region, int m, std::mt19937_64& rng) {
    const Index modes_count = basis.cols();
    const auto coeffs = lhs_sample(TrustRegion{Vector::Zero(modes_count), 1.0}, m, rng);
    const auto radii = lhs_sample(TrustRegion{Vector::Constant(1, 0.5), 0.5}, m, rng);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      Vector pert = basis * coeffs[static_cast<std::size_t>(j)];
      const double peak = inf_norm(pert);
      if (peak > 0.0) pert *= radii[static_cast<std::size_t>(j)](0) * region.half_width / peak;
      Vector u = region.center + pert;
      u = u.array().max(region.center.array() - region.half_width).min(region.center.array() + region.half_width).matrix();
      out.push_back(std::move(u));
    }
    return out;
  };
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace saddle::systems
