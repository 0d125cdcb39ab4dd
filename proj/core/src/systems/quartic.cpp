#include "saddle/systems/quartic.hpp"

#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace saddle::systems {

QuarticModel QuarticModel::from_json(const nlohmann::json& doc) {
  const auto rows = doc.at("matrix").get<std::vector<std::vector<double>>>();
  const auto n = static_cast<Index>(rows.size());
  if (n == 0) throw std::invalid_argument("quartic model: empty matrix");
  QuarticModel m{Matrix(n, n), Vector::Zero(n), Vector::Zero(n)};
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
      throw std::invalid_argument("quartic model: matrix must be square");
    }
    for (Index j = 0; j < n; ++j) m.hessian(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if ((m.hessian - m.hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("quartic model: matrix must be symmetric");
  }
  auto read = [&](const char* key, Vector& v) {
    if (!doc.contains(key)) return;
    const auto values = doc.at(key).get<std::vector<double>>();
    if (static_cast<Index>(values.size()) != n) throw std::invalid_argument(std::string("quartic model: bad size for ") + key);
    v = Eigen::Map<const Vector>(values.data(), n);
  };
  read("center", m.center);
  read("quartic", m.quartic);
  return m;
}

QuarticModel QuarticModel::double_well() {
  QuarticModel m{Matrix::Zero(2, 2), Vector::Zero(2), Vector::Zero(2)};
  m.hessian(0, 0) = -1.0;
  m.hessian(1, 1) = 1.0;
  m.quartic(0) = 1.0;
  return m;
}

Vector QuarticModel::force(const Vector& x) const {
  return -hessian * (x - center) - quartic.cwiseProduct(x.array().cube().matrix());
}

double QuarticModel::energy(const Vector& x) const {
  const Vector d = x - center;
  return 0.5 * d.dot(hessian * d) + 0.25 * quartic.dot(x.array().pow(4).matrix());
}

QuarticOracle::QuarticOracle(QuarticModel model)
    : ForceOracle(model.hessian.rows(), OracleKind::analytic, true), model_(std::move(model)) {}

}  // namespace saddle::systems
