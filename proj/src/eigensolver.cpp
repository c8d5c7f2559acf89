#include "kreinlab/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kreinlab/errors.hpp"

namespace kreinlab::eigen {

namespace {

SparseMatrix absolute(const SparseMatrix& m) {
  SparseMatrix out = m;
  for (int k = 0; k < out.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(out, k); it; ++it) it.valueRef() = std::abs(it.value());
  return out;
}

// B-orthonormalize the columns of w against `basis` (already B-orthonormal,
// bw = B * basis) and among themselves; columns that collapse are dropped.
DenseMatrix orthonormalize_block(const SparseMatrix& b, const DenseMatrix& basis,
                                 const DenseMatrix& b_basis, DenseMatrix w) {
  for (int pass = 0; pass < 2; ++pass) {
    if (basis.cols() > 0) w -= basis * (b_basis.transpose() * w);
  }
  std::vector<Vector> kept;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    Vector v = w.col(j);
    const double before = std::sqrt(std::max(0.0, v.dot(b * v)));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : kept) v -= u * u.dot(b * v);
      if (basis.cols() > 0) v -= basis * (b_basis.transpose() * v);
    }
    const double after = std::sqrt(std::max(0.0, v.dot(b * v)));
    if (!(after > 1e-10 * before) || after == 0.0) continue;
    kept.push_back(v / after);
  }
  DenseMatrix out(w.rows(), Eigen::Index(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(Eigen::Index(j)) = kept[j];
  return out;
}

double inf_norm(const SparseMatrix& m) {
  Vector rows = Vector::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

// Normwise backward error |A x - l B x| / ((|A| + |l| |B|) |x|).
Vector pair_residuals(const SparseMatrix& a, const SparseMatrix& b, const Vector& values,
                      const DenseMatrix& vectors) {
  const double norm_a = inf_norm(a);
  const double norm_b = inf_norm(b);
  Vector res(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const Vector x = vectors.col(i);
    const Vector r = a * x - values(i) * (b * x);
    const double denom = (norm_a + std::abs(values(i)) * norm_b) * x.cwiseAbs().maxCoeff();
    res(i) = denom > 0.0 ? r.cwiseAbs().maxCoeff() / denom : 0.0;
  }
  return res;
}

}  // namespace

ShiftedPencil::ShiftedPencil(const SparseMatrix& a, const SparseMatrix& b, double sigma)
    : matrix_(a - sigma * b), sigma_(sigma) {
  matrix_.makeCompressed();
  abs_matrix_ = absolute(matrix_);
  ldlt_.compute(matrix_);
  if (ldlt_.info() != Eigen::Success) return;
  const Vector& d = ldlt_.vectorD();
  ok_ = d.allFinite() && (d.array() != 0.0).all();
  negative_ = (d.array() < 0.0).count();
}

Vector ShiftedPencil::solve(const Vector& rhs) const {
  if (!ok_) throw NumericalError("singular_pencil", "shifted pencil is singular at sigma = " + std::to_string(sigma_),
                                 {{"sigma", sigma_}});
  Vector x = ldlt_.solve(rhs);
  for (int step = 0; step < 3; ++step) {
    if (backward_error(x, rhs) <= 1e-14) break;
    const Vector r = rhs - matrix_ * x;
    x += ldlt_.solve(r);
  }
  return x;
}

DenseMatrix ShiftedPencil::solve(const DenseMatrix& rhs) const {
  DenseMatrix out(rhs.rows(), rhs.cols());
  for (Eigen::Index j = 0; j < rhs.cols(); ++j) out.col(j) = solve(Vector(rhs.col(j)));
  return out;
}

double ShiftedPencil::backward_error(const Vector& x, const Vector& rhs) const {
  const Vector r = rhs - matrix_ * x;
  const Vector scale = abs_matrix_ * x.cwiseAbs() + rhs.cwiseAbs();
  const double denom = scale.maxCoeff();
  return denom > 0.0 ? r.cwiseAbs().maxCoeff() / denom : 0.0;
}

Eigenpairs dense_eigenpairs(const DenseMatrix& a, const DenseMatrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(a, b, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw NumericalError("dense_eigensolver_failed", "dense generalized eigensolve failed (mass not positive definite?)");
  Eigenpairs out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  out.residuals = pair_residuals(linalg::to_sparse(a), linalg::to_sparse(b), out.values, out.vectors);
  return out;
}

double shift_below_spectrum(const SparseMatrix& a, const SparseMatrix& b, int bisections) {
  const Eigen::Index n = a.rows();
  double upper = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) upper = std::min(upper, a.coeff(i, i) / b.coeff(i, i));
  // Rayleigh quotients of unit vectors bound the smallest eigenvalue from
  // above; step down geometrically until the pencil is positive definite.
  double step = upper != 0.0 ? std::abs(upper) : 1.0;
  double lower = upper - step;
  int guard = 0;
  while (!ShiftedPencil(a, b, lower).positive_definite()) {
    upper = lower;
    step *= 2.0;
    lower -= step;
    if (++guard > 1100) throw NumericalError("no_lower_bound", "could not find a shift below the spectrum");
  }
  // Bisect the bracket [lower, upper] (lower definite, upper not) until it
  // is narrow relative to its position, and at least `bisections` times.
  for (int i = 0; i < 200; ++i) {
    const double width = upper - lower;
    if (i >= bisections && width <= 1e-3 * std::max(std::abs(lower), std::abs(upper))) break;
    const double mid = 0.5 * (lower + upper);
    if (mid <= lower || mid >= upper) break;
    if (ShiftedPencil(a, b, mid).positive_definite())
      lower = mid;
    else
      upper = mid;
  }
  return lower;
}

namespace {

// Inertia of A - sigma B at sampled shifts. Counts are exact integers from
// the LDL^T pivots; a shift that hits an eigenvalue to working precision is
// nudged upward and recorded at the nudged position.
class InertiaSampler {
 public:
  InertiaSampler(const SparseMatrix& a, const SparseMatrix& b) : a_(a), b_(b) {}

  Eigen::Index count(double& sigma) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const ShiftedPencil p(a_, b_, sigma);
      if (p.ok()) {
        samples_.emplace_back(sigma, p.negative_pivots());
        return p.negative_pivots();
      }
      sigma += std::max(std::abs(sigma), 1e-300) * 1e-13 * double(1 << attempt);
    }
    throw NumericalError("singular_pencil", "pencil stays singular around a sampled shift", {{"sigma", sigma}});
  }

  // Largest sample with count < l and smallest with count >= l.
  std::pair<double, double> bracket(Eigen::Index l) const {
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (const auto& [s, c] : samples_) {
      if (c < l) lo = std::max(lo, s);
      else hi = std::min(hi, s);
    }
    return {lo, hi};
  }

 private:
  const SparseMatrix& a_;
  const SparseMatrix& b_;
  std::vector<std::pair<double, Eigen::Index>> samples_;
};

// Bisection interval [lo, hi] containing eigenvalue l (1-based).
std::pair<double, double> locate(InertiaSampler& sampler, Eigen::Index l, double floor) {
  auto [lo, hi] = sampler.bracket(l);
  if (!std::isfinite(hi)) {
    double step = std::max(std::abs(lo), floor);
    double sigma = lo + step;
    for (int guard = 0; sampler.count(sigma) < l; ++guard) {
      if (guard > 1100) throw NumericalError("no_upper_bound", "could not bracket the requested eigenvalue");
      step *= 2.0;
      sigma = lo + step;
    }
    std::tie(lo, hi) = sampler.bracket(l);
  }
  for (int i = 0; i < 200; ++i) {
    if (hi - lo <= 1e-11 * std::max(std::abs(lo), std::abs(hi)) + 1e-14 * floor) break;
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const bool below = sampler.count(mid) < l;
    if (below) lo = std::max(lo, mid); else hi = std::min(hi, mid);
    std::tie(lo, hi) = sampler.bracket(l);
  }
  return {lo, hi};
}

DenseMatrix b_orthonormal(const SparseMatrix& b, const DenseMatrix& w) {
  return orthonormalize_block(b, DenseMatrix(w.rows(), 0), DenseMatrix(w.rows(), 0), w);
}

Eigenpairs rayleigh_ritz(const SparseMatrix& a, const SparseMatrix& b, const DenseMatrix& basis, int k) {
  DenseMatrix h = basis.transpose() * (a * basis);
  h = 0.5 * (h + h.transpose()).eval();
  DenseMatrix g = basis.transpose() * (b * basis);
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> rr(h, g);
  if (rr.info() != Eigen::Success) throw NumericalError("rayleigh_ritz_failed", "projected eigenproblem failed");
  Eigenpairs out;
  out.values = rr.eigenvalues().head(k);
  out.vectors = basis * rr.eigenvectors().leftCols(k);
  out.residuals = pair_residuals(a, b, out.values, out.vectors);
  return out;
}

// Spectrum slicing: inertia bisection isolates the k smallest eigenvalues
// (and the cluster the k-th belongs to), block inverse iteration next to
// each cluster gives its invariant subspace, and one Rayleigh-Ritz step over
// all clusters polishes the pairs.
Eigenpairs slicing_eigenpairs(const SparseMatrix& a, const SparseMatrix& b, int k, const EigenOptions& options) {
  const Eigen::Index n = a.rows();
  InertiaSampler sampler(a, b);
  double sigma0 = shift_below_spectrum(a, b, 0);
  sampler.count(sigma0);
  const double floor = std::max(std::abs(sigma0), 1e-300);

  struct Cluster {
    double lo, hi;
    Eigen::Index first, size;  // eigenvalue indices (0-based) first .. first+size-1
  };
  std::vector<Cluster> clusters;
  Eigen::Index l = 1;
  while (l <= n) {
    const auto [lo, hi] = locate(sampler, l, floor);
    double s_lo = lo, s_hi = hi;
    const Eigen::Index below = sampler.count(s_lo);
    const Eigen::Index upto = sampler.count(s_hi);
    const Eigen::Index size = std::max<Eigen::Index>(1, upto - below);
    clusters.push_back(Cluster{lo, hi, below, size});
    l = below + size + 1;
    if (below + size >= k) break;
  }
  // One more eigenvalue past the last cluster to know its gap above.
  double next_value = std::numeric_limits<double>::infinity();
  if (l <= n) {
    const auto [lo, hi] = locate(sampler, l, floor);
    next_value = 0.5 * (lo + hi);
  }

  std::vector<DenseMatrix> blocks;
  Eigen::Index total = 0;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const double mu = 0.5 * (clusters[c].lo + clusters[c].hi);
    const double below_gap = c == 0 ? std::numeric_limits<double>::infinity()
                                    : mu - 0.5 * (clusters[c - 1].lo + clusters[c - 1].hi);
    const double above_gap = (c + 1 < clusters.size() ? 0.5 * (clusters[c + 1].lo + clusters[c + 1].hi) : next_value) - mu;
    double gap = std::min(below_gap, above_gap);
    if (!std::isfinite(gap)) gap = std::max(std::abs(mu), floor);
    const double delta = std::max(1e-4 * gap, 1e-11 * std::max(std::abs(mu), 1e-14 * floor));
    const ShiftedPencil pencil(a, b, mu - delta);
    if (!pencil.ok()) return Eigenpairs{};
    DenseMatrix x = b_orthonormal(b, linalg::gaussian_matrix(n, clusters[c].size, options.seed + 31 * c));
    for (int it = 0; it < 4 && x.cols() > 0; ++it) x = b_orthonormal(b, pencil.solve(DenseMatrix(b * x)));
    if (x.cols() != clusters[c].size) return Eigenpairs{};
    total += x.cols();
    blocks.push_back(std::move(x));
  }
  DenseMatrix basis(n, total);
  Eigen::Index col = 0;
  for (const auto& x : blocks) {
    basis.middleCols(col, x.cols()) = x;
    col += x.cols();
  }
  basis = b_orthonormal(b, basis);
  if (basis.cols() < k) return Eigenpairs{};
  return rayleigh_ritz(a, b, basis, k);
}

Eigenpairs krylov_eigenpairs(const SparseMatrix& a, const SparseMatrix& b, int k, const EigenOptions& options,
                             double& best_residual) {
  const Eigen::Index n = a.rows();
  const double sigma = shift_below_spectrum(a, b);
  const ShiftedPencil pencil(a, b, sigma);
  const Eigen::Index block = std::min<Eigen::Index>(n, k + 3);
  const Eigen::Index cap = std::min<Eigen::Index>(n, std::max<Eigen::Index>(options.max_subspace, 4 * block));

  DenseMatrix start = linalg::gaussian_matrix(n, block, options.seed);

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    DenseMatrix basis(n, 0);
    DenseMatrix b_basis(n, 0);
    DenseMatrix a_basis(n, 0);
    DenseMatrix current = orthonormalize_block(b, basis, b_basis, start);

    while (true) {
      const Eigen::Index old = basis.cols();
      basis.conservativeResize(n, old + current.cols());
      basis.rightCols(current.cols()) = current;
      b_basis.conservativeResize(n, basis.cols());
      a_basis.conservativeResize(n, basis.cols());
      for (Eigen::Index j = 0; j < current.cols(); ++j) {
        b_basis.col(old + j) = b * current.col(j);
        a_basis.col(old + j) = a * current.col(j);
      }

      const Eigen::Index m = basis.cols();
      if (m >= k) {
        DenseMatrix h = basis.transpose() * a_basis;
        h = 0.5 * (h + h.transpose()).eval();
        DenseMatrix g = basis.transpose() * b_basis;
        g = 0.5 * (g + g.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> rr(h, g);
        if (rr.info() == Eigen::Success) {
          const Vector theta = rr.eigenvalues().head(k);
          const DenseMatrix ritz = basis * rr.eigenvectors().leftCols(k);
          const Vector res = pair_residuals(a, b, theta, ritz);
          best_residual = std::min(best_residual, res.maxCoeff());
          if (res.maxCoeff() <= options.tolerance) return Eigenpairs{theta, ritz, res};
          if (m == n) return Eigenpairs{};
          if (m + block > cap) {
            start = basis * rr.eigenvectors().leftCols(std::min<Eigen::Index>(block, m));
            break;
          }
        }
      }

      const DenseMatrix next = pencil.solve(DenseMatrix(b_basis.rightCols(current.cols())));
      current = orthonormalize_block(b, basis, b_basis, next);
      if (current.cols() == 0) {
        // Invariant subspace reached without the requested pairs converging: perturb and restart.
        start = basis.leftCols(std::min<Eigen::Index>(block, m)) +
                1e-3 * linalg::gaussian_matrix(n, std::min<Eigen::Index>(block, m), options.seed + 17 + restart);
        break;
      }
    }
  }
  return Eigenpairs{};
}

}  // namespace

Eigenpairs smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& b, int k, const EigenOptions& options) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n)
    throw ValidationError("pencil", "A and B must be square and of equal size");
  if (k < 1 || k > n) throw ValidationError("k", "requested " + std::to_string(k) + " eigenpairs of a " +
                                                       std::to_string(n) + "-dimensional pencil");

  if (n <= options.dense_threshold) {
    Eigenpairs all = dense_eigenpairs(DenseMatrix(a), DenseMatrix(b));
    Eigenpairs out;
    out.values = all.values.head(k);
    out.vectors = all.vectors.leftCols(k);
    out.residuals = all.residuals.head(k);
    return out;
  }

  double best_residual = std::numeric_limits<double>::infinity();
  Eigenpairs sliced = slicing_eigenpairs(a, b, k, options);
  if (sliced.values.size() == k) {
    best_residual = sliced.residuals.maxCoeff();
    if (best_residual <= options.tolerance) return sliced;
  }
  Eigenpairs krylov = krylov_eigenpairs(a, b, k, options, best_residual);
  if (krylov.values.size() == k) return krylov;
  throw NumericalError("eigensolver_no_convergence",
                       "smallest_eigenpairs did not reach the residual tolerance",
                       {{"residual", best_residual}, {"tolerance", options.tolerance}});
}

}  // namespace kreinlab::eigen
