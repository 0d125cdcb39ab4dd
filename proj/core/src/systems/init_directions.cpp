#include "saddle/systems/init_directions.hpp"

#include <cmath>
#include <stdexcept>

namespace saddle::systems {

DirectionInit init_directions(const SymmetricMatrix& jacobian, int k) {
  const Index n = jacobian.dim();
  if (k < 0 || k > n) throw std::invalid_argument("init_directions: k out of range");
  const EigenDecomposition eig = sym_eigen(jacobian);
  Matrix v(n, k);
  for (int i = 0; i < k; ++i) v.col(i) = eig.vectors.col(n - 1 - i);
  DirectionInit out;
  out.frame = k > 0 ? DirectionFrame::from_orthonormal(std::move(v)) : DirectionFrame(n);
  if (k > 0 && k < n) out.degenerate_gap = std::abs(eig.values(n - k) - eig.values(n - k - 1)) < 1e-10;
  return out;
}

}  // namespace saddle::systems
