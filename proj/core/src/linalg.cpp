#include "saddle/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "saddle/errors.hpp"

namespace saddle {

namespace {

// Makes the first component with |v_i| > 1e-12 * ||v|| positive.
void fix_sign(Eigen::Ref<Vector> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

DirectionFrame DirectionFrame::from_orthonormal(Matrix columns, double tol) {
  if (columns.cols() > columns.rows()) {
    throw std::invalid_argument("DirectionFrame: more vectors than dimensions");
  }
  DirectionFrame frame;
  frame.vectors_ = std::move(columns);
  if (frame.orthonormality_error() > tol) {
    throw std::invalid_argument("DirectionFrame: columns are not orthonormal");
  }
  return frame;
}

DirectionFrame DirectionFrame::leading(Index k) const {
  if (k < 0 || k > count()) {
    throw std::invalid_argument("DirectionFrame::leading: k out of range");
  }
  DirectionFrame frame;
  frame.vectors_ = vectors_.leftCols(k);
  return frame;
}

double DirectionFrame::orthonormality_error() const {
  if (count() == 0) return 0.0;
  const Matrix gram = vectors_.transpose() * vectors_;
  return (gram - Matrix::Identity(count(), count())).cwiseAbs().maxCoeff();
}

SymmetricMatrix::SymmetricMatrix(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("SymmetricMatrix: matrix must be square");
  }
  a_ = 0.5 * (a + a.transpose());
}

DirectionFrame gram_schmidt(const Matrix& columns) {
  const Index n = columns.rows();
  const Index k = columns.cols();
  if (k > n) {
    throw DegenerateInput("gram_schmidt: " + std::to_string(k) + " vectors in R^" + std::to_string(n));
  }

  Matrix q(n, k);
  for (Index i = 0; i < k; ++i) {
    const double input_norm = columns.col(i).norm();
    if (!(input_norm > 0.0) || !std::isfinite(input_norm)) {
      throw DegenerateInput("gram_schmidt: zero or non-finite input vector " + std::to_string(i));
    }
    Vector r = columns.col(i) / input_norm;
    // Two passes of modified Gram-Schmidt keep ||Q^T Q - I|| at round-off level.
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < i; ++j) {
        r -= q.col(j).dot(r) * q.col(j);
      }
    }
    const double residual = r.norm();
    if (residual < 1e-12) {
      throw DegenerateInput("gram_schmidt: vector " + std::to_string(i) + " is linearly dependent on its predecessors");
    }
    q.col(i) = r / residual;
  }
  return DirectionFrame::from_orthonormal(std::move(q), 1e-10);
}

EigenDecomposition sym_eigen(const SymmetricMatrix& sym, const EigenOptions& options) {
  const Index n = sym.dim();
  if (n > options.dense_limit) {
    throw std::invalid_argument("sym_eigen: dimension " + std::to_string(n) + " exceeds dense limit " +
                                std::to_string(options.dense_limit));
  }

  Matrix a = sym.matrix();
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();

  auto off_diagonal = [&] {
    double s = 0.0;
    for (Index q = 1; q < n; ++q)
      for (Index p = 0; p < q; ++p) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  bool converged = (n <= 1) || scale == 0.0;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    if (off_diagonal() <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        // Rotation angle annihilating a(p,q), smaller root for stability.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Index r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (Index r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  if (!converged && off_diagonal() > 1e-15 * scale) {
    throw ConvergenceFailure("sym_eigen: no convergence after " + std::to_string(options.max_sweeps) + " sweeps");
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Index i = 0; i < n; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    out.values(i) = a(src, src);
    out.vectors.col(i) = v.col(src);
    fix_sign(out.vectors.col(i));
  }
  return out;
}

SymmetricMatrix fd_jacobian_sym(ForceOracle& force, const Vector& x, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("fd_jacobian_sym: step must be positive");
  }
  const Index n = x.size();
  Matrix j(n, n);
  Vector probe = x;
  for (Index i = 0; i < n; ++i) {
    probe(i) = x(i) + step;
    const Vector plus = force.evaluate(probe);
    probe(i) = x(i) - step;
    const Vector minus = force.evaluate(probe);
    probe(i) = x(i);
    j.col(i) = (plus - minus) / (2.0 * step);
  }
  return SymmetricMatrix(j);
}

MorseIndex morse_index(const EigenDecomposition& eig, double zero_tol) {
  MorseIndex out;
  for (Index i = 0; i < eig.values.size(); ++i) {
    const double lambda = eig.values(i);
    if (lambda > zero_tol) {
      ++out.index;
    } else if (std::abs(lambda) <= zero_tol) {
      ++out.degenerate;
    }
  }
  return out;
}

double default_zero_tol(const EigenDecomposition& eig) {
  const double radius = eig.values.size() == 0 ? 0.0 : eig.values.cwiseAbs().maxCoeff();
  return 1e-6 * std::max(1.0, radius);
}

}  // namespace saddle
