#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>

namespace kreinlab {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

namespace linalg {

/// max |A - A^T| / max |A| (0 for the zero matrix).
double relative_asymmetry(const SparseMatrix& a);
double relative_asymmetry(const DenseMatrix& a);

/// Largest absolute diagonal entry; the reference scale for PSD tolerances.
double max_abs_diagonal(const DenseMatrix& a);

/// Smallest eigenvalue of a dense symmetric matrix (0 for an empty matrix).
double min_eigenvalue(const DenseMatrix& symmetric);

/// True when the smallest eigenvalue is >= -rel_tol * max|diag|.
bool is_positive_semidefinite(const DenseMatrix& symmetric, double rel_tol = 1e-12);

/// True when every LDL^T pivot of the sparse symmetric matrix is positive.
bool is_positive_definite(const SparseMatrix& symmetric);

/// Numerical column rank (SVD, tolerance relative to the largest singular value).
Eigen::Index column_rank(const DenseMatrix& a, double rel_tol = 1e-10);

SparseMatrix to_sparse(const DenseMatrix& a, double drop_below = 0.0);

/// Symmetric block matrix [[a, b], [b^T, c]] with a sparse, b and c dense.
SparseMatrix symmetric_block(const SparseMatrix& a, const DenseMatrix& b, const DenseMatrix& c);

/// Dense standard-normal matrix from a 64-bit seed (mt19937_64).
DenseMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

}  // namespace linalg
}  // namespace kreinlab
