#pragma once

#include <cstdint>
#include <memory>

#include "kreinlab/eigensolver.hpp"
#include "kreinlab/extension_forms.hpp"

namespace kreinlab {

/// A real resolvent point. Every operator of an experiment must have its
/// lower bound above z + margin for the definite solve path.
struct Shift {
  double z = -2.0;
  double margin = 1.0;
};

/// Whether a resolvent may be formed at a shift above part of the spectrum.
/// Sequences perturbed by an attractive cut-off potential are not uniformly
/// bounded below, so their resolvents at a fixed real z need the indefinite
/// path; only z in the spectrum is then rejected.
enum class ShiftPolicy { require_definite, allow_indefinite };

/// (H - z)^{-1} of an assembled operator, acting on ambient vectors with the
/// ambient mass inner product: f -> P (F - z M)^{-1} P^T M_amb f.
/// Holds one factorization; concurrent applications are safe.
class Resolvent {
 public:
  Resolvent(const AssembledOperator& op, double z, ShiftPolicy policy = ShiftPolicy::require_definite);

  double z() const noexcept { return pencil_->sigma(); }
  /// Number of eigenvalues of H strictly below z.
  Eigen::Index eigenvalues_below_shift() const noexcept { return pencil_->negative_pivots(); }
  const std::shared_ptr<const AmbientSpace>& ambient() const noexcept { return ambient_; }

  Vector apply(const Vector& f_ambient) const;
  /// Solves (F - z M) u = rhs in the operator's own basis.
  Vector solve(const Vector& rhs) const;

 private:
  std::shared_ptr<const eigen::ShiftedPencil> pencil_;
  SparseMatrix embedding_;
  std::shared_ptr<const AmbientSpace> ambient_;
};

/// u with (F - z M) u = M f, f and u in the operator's basis.
Vector resolvent_apply(const AssembledOperator& op, const Shift& shift, const Vector& f,
                       ShiftPolicy policy = ShiftPolicy::require_definite);

/// k smallest generalized eigenpairs of (F, M), mass-orthonormal vectors.
eigen::Eigenpairs lowest_eigenpairs(const AssembledOperator& op, int k);

/// Power-iteration estimate of the ambient-mass operator norm of
/// R1(z) - R2(z). The returned value is the running maximum of the
/// Rayleigh-type ratios and so is nondecreasing in `iterations`.
double resolvent_diff_norm(const AssembledOperator& op1, const AssembledOperator& op2, const Shift& shift,
                           int iterations, std::uint64_t seed = 7,
                           ShiftPolicy policy = ShiftPolicy::require_definite);
double resolvent_diff_norm(const Resolvent& r1, const Resolvent& r2, int iterations, std::uint64_t seed = 7);

/// Extreme eigenvalues of R1 - R2 (self-adjoint in the ambient mass inner
/// product) by Lanczos with full reorthogonalization.
struct SpectralRange {
  double min = 0.0;
  double max = 0.0;
};
SpectralRange resolvent_difference_range(const Resolvent& r1, const Resolvent& r2, int max_steps = 80,
                                         std::uint64_t seed = 11);

/// Ambient mass inner product and norm.
double mass_inner(const AmbientSpace& ambient, const Vector& u, const Vector& v);
double mass_norm(const AmbientSpace& ambient, const Vector& u);

}  // namespace kreinlab
