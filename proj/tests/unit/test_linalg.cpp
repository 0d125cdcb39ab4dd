#include <random>

#include <doctest.h>
#include <Eigen/Eigenvalues>

#include "saddle/linalg.hpp"

using namespace saddle;

namespace {

Matrix random_matrix(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("gram_schmidt yields an orthonormal frame" * doctest::test_suite("invariants")) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Matrix a = random_matrix(9, 4, seed);
    const DirectionFrame f = gram_schmidt(a);
    CHECK(f.count() == 4);
    CHECK(f.orthonormality_error() < 1e-13);
    // Same span: projecting the input onto the frame loses nothing.
    const Matrix residual = a - f.vectors() * (f.vectors().transpose() * a);
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-12);
    for (Index i = 0; i < 4; ++i) CHECK(f.vector(i).dot(a.col(i)) > 0.0);
  }
}

TEST_CASE("gram_schmidt is idempotent" * doctest::test_suite("invariants")) {
  const DirectionFrame once = gram_schmidt(random_matrix(6, 3, 7));
  const DirectionFrame twice = gram_schmidt(once.vectors());
  CHECK((once.vectors() - twice.vectors()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gram_schmidt keeps orthonormality for nearly dependent columns" * doctest::test_suite("invariants")) {
  Matrix a = random_matrix(5, 2, 3);
  a.col(1) = a.col(0) + 1e-9 * a.col(1);
  CHECK(gram_schmidt(a).orthonormality_error() < 1e-12);
}

TEST_CASE("gram_schmidt rejects dependent columns") {
  Matrix a = random_matrix(4, 2, 1);
  a.col(1) = 2.0 * a.col(0);
  CHECK_THROWS(gram_schmidt(a));
}

TEST_CASE("DirectionFrame basics") {
  const DirectionFrame empty(5);
  CHECK(empty.dim() == 5);
  CHECK(empty.count() == 0);
  CHECK(empty.orthonormality_error() == 0.0);
  CHECK_THROWS_AS(DirectionFrame::from_orthonormal(Matrix::Ones(3, 2)), std::invalid_argument);
  const DirectionFrame f = DirectionFrame::from_orthonormal(Matrix::Identity(4, 3));
  CHECK(f.leading(2).count() == 2);
  CHECK(f.leading(2).vectors() == Matrix::Identity(4, 2));
}

TEST_CASE("sym_eigen matches a reference eigensolver") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Matrix r = random_matrix(12, 12, seed);
    const SymmetricMatrix a(r + r.transpose());
    const EigenDecomposition eig = sym_eigen(a);
    const Eigen::SelfAdjointEigenSolver<Matrix> ref(a.matrix());
    CHECK((eig.values - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-11);
    for (Index i = 1; i < eig.values.size(); ++i) CHECK(eig.values(i) >= eig.values(i - 1));
    // A V = V diag(lambda), V orthonormal.
    const Matrix av = a.matrix() * eig.vectors;
    const Matrix vl = eig.vectors * eig.values.asDiagonal();
    CHECK((av - vl).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((eig.vectors.transpose() * eig.vectors - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sym_eigen fixes eigenvector signs") {
  const Matrix r = random_matrix(6, 6, 42);
  const EigenDecomposition eig = sym_eigen(SymmetricMatrix(r + r.transpose()));
  for (Index j = 0; j < 6; ++j) {
    Index first = 0;
    while (std::abs(eig.vectors(first, j)) < 1e-12) ++first;
    CHECK(eig.vectors(first, j) > 0.0);
  }
}

TEST_CASE("sym_eigen handles diagonal and 1x1 input") {
  const EigenDecomposition one = sym_eigen(SymmetricMatrix(Matrix::Constant(1, 1, -3.0)));
  CHECK(one.values(0) == -3.0);
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 2.0, -1.0, 5.0;
  const EigenDecomposition eig = sym_eigen(SymmetricMatrix(d));
  CHECK(eig.values(0) == doctest::Approx(-1.0));
  CHECK(eig.values(2) == doctest::Approx(5.0));
}

TEST_CASE("SymmetricMatrix symmetrizes") {
  Matrix a(2, 2);
  a << 1.0, 2.0, 4.0, 3.0;
  const SymmetricMatrix s(a);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
}

TEST_CASE("fd_jacobian_sym is exact on a linear force and costs 2N queries") {
  Matrix a = random_matrix(5, 5, 9);
  a = (a + a.transpose()).eval();
  FunctionOracle f(5, [a](const Vector& x) { return Vector(-a * x); });
  const SymmetricMatrix j = fd_jacobian_sym(f, Vector::Constant(5, 0.3), 1e-4);
  CHECK((j.matrix() + a).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(f.query_count() == 10);
}

TEST_CASE("morse_index counts positive eigenvalues of grad F") {
  EigenDecomposition eig;
  eig.values = Vector{{-2.0, -1e-9, 0.5, 3.0}};
  eig.vectors = Matrix::Identity(4, 4);
  const MorseIndex mi = morse_index(eig, 1e-6);
  CHECK(mi.index == 2);
  CHECK(mi.degenerate == 1);
  CHECK(default_zero_tol(eig) == doctest::Approx(3e-6));
}
