#pragma once

#include "saddle/linalg.hpp"

namespace saddle::systems {

struct DirectionInit {
  DirectionFrame frame;
  /// lambda_k and lambda_{k+1} closer than 1e-10: the frame is not unique.
  bool degenerate_gap = false;
};

/// Eigenvectors of the k largest eigenvalues of H = grad F, largest first.
DirectionInit init_directions(const SymmetricMatrix& jacobian, int k);

}  // namespace saddle::systems
