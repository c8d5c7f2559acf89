#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kreinlab/eigensolver.hpp"
#include "kreinlab/errors.hpp"

using namespace kreinlab;

namespace {

// Dirichlet second difference on n interior points of (0, 1), identity mass.
SparseMatrix laplacian(int n) {
  const double h = 1.0 / (n + 1);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 / (h * h));
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1.0 / (h * h));
      t.emplace_back(i + 1, i, -1.0 / (h * h));
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseMatrix identity(int n) {
  SparseMatrix b(n, n);
  b.setIdentity();
  return b;
}

double discrete_dirichlet(int n, int j) {
  const double h = 1.0 / (n + 1);
  const double s = std::sin(j * std::numbers::pi * h / 2.0);
  return 4.0 / (h * h) * s * s;
}

Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> dense_oracle(const SparseMatrix& a, const SparseMatrix& b) {
  return Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix>(DenseMatrix(a), DenseMatrix(b));
}

}  // namespace

TEST_CASE("inertia of the shifted pencil counts eigenvalues below the shift") {
  const SparseMatrix a = laplacian(50);
  const SparseMatrix b = identity(50);
  for (int j : {1, 3, 10}) {
    const double between = 0.5 * (discrete_dirichlet(50, j) + discrete_dirichlet(50, j + 1));
    const eigen::ShiftedPencil p(a, b, between);
    REQUIRE(p.ok());
    CHECK(p.negative_pivots() == j);
  }
  CHECK(eigen::ShiftedPencil(a, b, 0.0).positive_definite());
}

TEST_CASE("shifted solves reach a small backward error") {
  const SparseMatrix a = laplacian(300);
  const eigen::ShiftedPencil p(a, identity(300), 123.4);
  const Vector rhs = linalg::gaussian_matrix(300, 1, 5).col(0);
  const Vector x = p.solve(rhs);
  CHECK(p.backward_error(x, rhs) <= 1e-14);
  CHECK((p.matrix() * x - rhs).norm() <= 1e-9 * rhs.norm() * a.norm());
}

TEST_CASE("sparse path matches the analytic discrete Dirichlet spectrum") {
  const int n = 400;
  const auto pairs = eigen::smallest_eigenpairs(laplacian(n), identity(n), 4);
  REQUIRE(pairs.values.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(pairs.values[j] == doctest::Approx(discrete_dirichlet(n, j + 1)).epsilon(1e-10));
  CHECK(pairs.residuals.maxCoeff() <= 1e-9);
  const DenseMatrix gram = pairs.vectors.transpose() * pairs.vectors;
  CHECK((gram - DenseMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("a doubled eigenvalue comes back with a two-dimensional eigenspace") {
  const int n = 200;
  const SparseMatrix half = laplacian(n);
  std::vector<Triplet> t;
  for (int k = 0; k < half.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(half, k); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
      t.emplace_back(it.row() + n, it.col() + n, it.value());
    }
  SparseMatrix a(2 * n, 2 * n);
  a.setFromTriplets(t.begin(), t.end());
  const auto pairs = eigen::smallest_eigenpairs(a, identity(2 * n), 3);
  CHECK(pairs.values[0] == doctest::Approx(discrete_dirichlet(n, 1)).epsilon(1e-11));
  CHECK(pairs.values[1] == doctest::Approx(discrete_dirichlet(n, 1)).epsilon(1e-11));
  CHECK(pairs.values[2] == doctest::Approx(discrete_dirichlet(n, 2)).epsilon(1e-11));
  CHECK(pairs.residuals.maxCoeff() <= 1e-9);
}

TEST_CASE("a far negative outlier does not hide the cluster above it") {
  // Second difference with a strongly attractive rank-one corner and a
  // non-identity mass: one eigenvalue far below the rest, as in the cut-off
  // sequences of extensions with a trace degree of freedom.
  const int n = 240;
  SparseMatrix a = laplacian(n);
  a.coeffRef(0, 0) -= 5e6;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0 / 6.0);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, 1.0 / 6.0);
      t.emplace_back(i + 1, i, 1.0 / 6.0);
    }
  }
  SparseMatrix b(n, n);
  b.setFromTriplets(t.begin(), t.end());
  const auto pairs = eigen::smallest_eigenpairs(a, b, 4);
  const auto oracle = dense_oracle(a, b);
  for (int j = 0; j < 4; ++j)
    CHECK(pairs.values[j] == doctest::Approx(oracle.eigenvalues()[j]).epsilon(1e-9));
  CHECK(pairs.values[0] < -1e5);
  const DenseMatrix gram = pairs.vectors.transpose() * (b * pairs.vectors);
  CHECK((gram - DenseMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("dense path returns the full spectrum of a small pencil") {
  DenseMatrix g = linalg::gaussian_matrix(6, 6, 3);
  const DenseMatrix a = 0.5 * (g + g.transpose());
  const DenseMatrix h = linalg::gaussian_matrix(6, 6, 4);
  const DenseMatrix b = h * h.transpose() + 6.0 * DenseMatrix::Identity(6, 6);
  const auto pairs = eigen::smallest_eigenpairs(linalg::to_sparse(a), linalg::to_sparse(b), 6);
  const auto oracle = Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix>(a, b);
  for (int j = 0; j < 6; ++j) CHECK(std::abs(pairs.values[j] - oracle.eigenvalues()[j]) <= 1e-10);
}

TEST_CASE("shift_below_spectrum lands below the smallest eigenvalue") {
  SparseMatrix a = laplacian(300);
  a.coeffRef(10, 10) -= 1e4;
  const double sigma = eigen::shift_below_spectrum(a, identity(300));
  const double lowest = dense_oracle(a, identity(300)).eigenvalues()[0];
  CHECK(sigma < lowest);
  CHECK(sigma > lowest - 1e-2 * std::abs(lowest));
}

TEST_CASE("invalid requests are rejected") {
  const SparseMatrix a = laplacian(10);
  CHECK_THROWS_AS(eigen::smallest_eigenpairs(a, identity(10), 0), ValidationError);
  CHECK_THROWS_AS(eigen::smallest_eigenpairs(a, identity(10), 11), ValidationError);
  CHECK_THROWS_AS(eigen::smallest_eigenpairs(a, identity(9), 1), ValidationError);
}
