#pragma once

#include "saddle/force_model.hpp"
#include "saddle/types.hpp"

namespace saddle {

/**
 * @brief k orthonormal N-vectors, stored as the columns of an N x k matrix.
 *
 * k = 0 is allowed and represents an empty frame (plain gradient flow).
 */
class DirectionFrame {
 public:
  DirectionFrame() = default;
  /// Empty frame in R^dim.
  explicit DirectionFrame(Index dim) : vectors_(dim, 0) {}

  /// Wraps columns that are already orthonormal; throws std::invalid_argument otherwise.
  static DirectionFrame from_orthonormal(Matrix columns, double tol = 1e-10);

  [[nodiscard]] Index dim() const noexcept { return vectors_.rows(); }
  [[nodiscard]] Index count() const noexcept { return vectors_.cols(); }
  [[nodiscard]] const Matrix& vectors() const noexcept { return vectors_; }
  [[nodiscard]] auto vector(Index i) const { return vectors_.col(i); }

  /// First `k` vectors of this frame.
  [[nodiscard]] DirectionFrame leading(Index k) const;

  /// max |V^T V - I|
  [[nodiscard]] double orthonormality_error() const;

 private:
  Matrix vectors_;
};

/// Dense symmetric matrix; symmetrized as (A + A^T)/2 on construction.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(const Matrix& a);

  [[nodiscard]] Index dim() const noexcept { return a_.rows(); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return a_; }
  double operator()(Index i, Index j) const { return a_(i, j); }

 private:
  Matrix a_;
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values(i)
};

struct EigenOptions {
  int max_sweeps = 100;
  Index dense_limit = 512;
};

/// Orthonormalizes the columns of `columns` in order (modified Gram-Schmidt,
/// two passes). Output column i has positive inner product with input column i.
DirectionFrame gram_schmidt(const Matrix& columns);

/// Cyclic Jacobi eigensolver. Eigenvectors are sign-fixed so their first
/// non-negligible component is positive.
EigenDecomposition sym_eigen(const SymmetricMatrix& a, const EigenOptions& options = {});

/// Symmetrized central-difference Jacobian of F at x. Costs 2N queries.
SymmetricMatrix fd_jacobian_sym(ForceOracle& force, const Vector& x, double step);

struct MorseIndex {
  int index = 0;       // eigenvalues > zero_tol (unstable directions of E)
  int degenerate = 0;  // |eigenvalue| <= zero_tol
};

/// Eigenvalues are those of H = grad F = -Hess E.
MorseIndex morse_index(const EigenDecomposition& eig, double zero_tol);

/// 1e-6 * max(1, spectral radius).
double default_zero_tol(const EigenDecomposition& eig);

}  // namespace saddle
