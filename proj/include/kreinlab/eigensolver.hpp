#pragma once

#include <cstdint>

#include <Eigen/SparseCholesky>

#include "kreinlab/linalg.hpp"

namespace kreinlab::eigen {

/// LDL^T factorization of the symmetric pencil A - sigma*B, with B symmetric
/// positive definite. Pivots are 1x1 and the ordering is natural, so the
/// signs of D give the inertia of A - sigma*B (Sylvester) and hence the
/// number of generalized eigenvalues below sigma. Immutable after
/// construction; concurrent solves are safe.
class ShiftedPencil {
 public:
  ShiftedPencil(const SparseMatrix& a, const SparseMatrix& b, double sigma);

  double sigma() const noexcept { return sigma_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }

  /// False when a pivot is exactly zero or non-finite (sigma is an eigenvalue
  /// to working precision).
  bool ok() const noexcept { return ok_; }
  Eigen::Index negative_pivots() const noexcept { return negative_; }
  bool positive_definite() const noexcept { return ok_ && negative_ == 0; }

  /// Solves (A - sigma*B) x = rhs with up to three steps of iterative refinement.
  Vector solve(const Vector& rhs) const;
  DenseMatrix solve(const DenseMatrix& rhs) const;

  /// Componentwise-normalised backward error max|r| / max(|A - sigma B||x| + |rhs|).
  double backward_error(const Vector& x, const Vector& rhs) const;

  const SparseMatrix& matrix() const noexcept { return matrix_; }

 private:
  SparseMatrix matrix_;
  SparseMatrix abs_matrix_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt_;
  double sigma_ = 0.0;
  bool ok_ = false;
  Eigen::Index negative_ = 0;
};

struct Eigenpairs {
  Vector values;        // ascending
  DenseMatrix vectors;  // B-orthonormal columns
  Vector residuals;     // normwise backward error per pair
};

struct EigenOptions {
  double tolerance = 1e-9;
  int max_subspace = 360;
  int max_restarts = 12;
  int dense_threshold = 160;
  std::uint64_t seed = 0x6b7265696eULL;
};

/// Dense generalized symmetric-definite eigensolve, all pairs.
Eigenpairs dense_eigenpairs(const DenseMatrix& a, const DenseMatrix& b);

/// The k smallest generalized eigenpairs of (A, B), B symmetric positive
/// definite. Small problems go to the dense solver. Larger ones are sliced:
/// inertia bisection locates the eigenvalues, block inverse iteration next to
/// each cluster gives the vectors and a Rayleigh-Ritz step polishes them.
/// A block shift-invert Krylov method is the fallback. Throws
/// NumericalError("eigensolver_no_convergence") with the residual reached.
Eigenpairs smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& b, int k,
                               const EigenOptions& options = {});

/// A shift strictly below the smallest eigenvalue of (A, B), found by
/// stepping down until A - sigma*B is positive definite and bisecting
/// towards the spectrum `bisections` times.
double shift_below_spectrum(const SparseMatrix& a, const SparseMatrix& b, int bisections = 8);

}  // namespace kreinlab::eigen
