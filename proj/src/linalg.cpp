#include "kreinlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/SparseCholesky>

namespace kreinlab::linalg {

double relative_asymmetry(const SparseMatrix& a) {
  const SparseMatrix diff = SparseMatrix(a - SparseMatrix(a.transpose()));
  double scale = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst / scale;
}

double relative_asymmetry(const DenseMatrix& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

double max_abs_diagonal(const DenseMatrix& a) {
  if (a.rows() == 0) return 0.0;
  return a.diagonal().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const DenseMatrix& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_positive_semidefinite(const DenseMatrix& symmetric, double rel_tol) {
  if (symmetric.rows() == 0) return true;
  const double scale = std::max(max_abs_diagonal(symmetric), symmetric.cwiseAbs().maxCoeff());
  return min_eigenvalue(symmetric) >= -rel_tol * scale;
}

bool is_positive_definite(const SparseMatrix& symmetric) {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt(symmetric);
  if (ldlt.info() != Eigen::Success) return false;
  return (ldlt.vectorD().array() > 0.0).all();
}

Eigen::Index column_rank(const DenseMatrix& a, double rel_tol) {
  if (a.cols() == 0) return 0;
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return (s.array() > rel_tol * s(0)).count();
}

SparseMatrix to_sparse(const DenseMatrix& a, double drop_below) {
  std::vector<Triplet> t;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (std::abs(a(i, j)) > drop_below) t.emplace_back(int(i), int(j), a(i, j));
  SparseMatrix s(a.rows(), a.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SparseMatrix symmetric_block(const SparseMatrix& a, const DenseMatrix& b, const DenseMatrix& c) {
  const int n = int(a.rows());
  const int m = int(c.rows());
  std::vector<Triplet> t;
  t.reserve(std::size_t(a.nonZeros() + 2 * b.size() + c.size()));
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) t.emplace_back(int(it.row()), int(it.col()), it.value());
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      if (b(i, j) == 0.0) continue;
      t.emplace_back(i, n + j, b(i, j));
      t.emplace_back(n + j, i, b(i, j));
    }
    for (int i = 0; i < m; ++i) t.emplace_back(n + i, n + j, c(i, j));
  }
  SparseMatrix s(n + m, n + m);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

DenseMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  return a;
}

}  // namespace kreinlab::linalg
