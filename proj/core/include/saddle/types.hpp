#pragma once

#include <Eigen/Core>

namespace saddle {

/// A point in R^N; also used for force values.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Max-norm of a vector, 0 for the empty vector.
inline double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace saddle
