#include "kreinlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kreinlab/errors.hpp"

namespace kreinlab {

namespace {

constexpr double kResidualTolerance = 1e-10;

void require_same_ambient(const Resolvent& r1, const Resolvent& r2) {
  if (r1.ambient() != r2.ambient() && r1.ambient()->dim() != r2.ambient()->dim())
    throw ValidationError("ambient", "resolvents act on different ambient spaces");
}

Vector start_vector(Eigen::Index n, std::uint64_t seed) { return linalg::gaussian_matrix(n, 1, seed).col(0); }

}  // namespace

double mass_inner(const AmbientSpace& ambient, const Vector& u, const Vector& v) { return u.dot(ambient.mass * v); }

double mass_norm(const AmbientSpace& ambient, const Vector& u) {
  return std::sqrt(std::max(0.0, mass_inner(ambient, u, u)));
}

Resolvent::Resolvent(const AssembledOperator& op, double z, ShiftPolicy policy)
    : pencil_(std::make_shared<eigen::ShiftedPencil>(op.form().form_matrix(), op.form().mass_matrix(), z)),
      embedding_(op.form().embedding()),
      ambient_(op.form().ambient()) {
  if (!std::isfinite(z)) throw ValidationError("z", "shift must be finite");
  if (!pencil_->ok())
    throw NumericalError("shift_in_spectrum", "z = " + std::to_string(z) + " is an eigenvalue to working precision",
                         {{"z", z}, {"lower_bound_estimate", op.lower_bound_estimate()}});
  if (policy == ShiftPolicy::require_definite && !pencil_->positive_definite())
    throw NumericalError("shift_too_high",
                         "pencil F - zM is not positive definite at z = " + std::to_string(z) +
                             "; the operator's lower bound estimate is " + std::to_string(op.lower_bound_estimate()),
                         {{"z", z},
                          {"lower_bound_estimate", op.lower_bound_estimate()},
                          {"eigenvalues_below_z", double(pencil_->negative_pivots())}});
}

Vector Resolvent::solve(const Vector& rhs) const {
  if (rhs.size() != pencil_->dim()) throw ValidationError("f", "dimension mismatch");
  Vector u = pencil_->solve(rhs);
  const double err = pencil_->backward_error(u, rhs);
  if (!(err <= kResidualTolerance))
    throw NumericalError("resolvent_residual", "resolvent solve did not reach the residual tolerance",
                         {{"residual", err}, {"tolerance", kResidualTolerance}});
  return u;
}

Vector Resolvent::apply(const Vector& f_ambient) const {
  if (f_ambient.size() != ambient_->dim()) throw ValidationError("f", "ambient dimension mismatch");
  const Vector load = embedding_.transpose() * (ambient_->mass * f_ambient);
  return embedding_ * solve(load);
}

Vector resolvent_apply(const AssembledOperator& op, const Shift& shift, const Vector& f, ShiftPolicy policy) {
  if (f.size() != op.dim())
    throw ValidationError("f", "vector of dimension " + std::to_string(f.size()) + " for an operator of dimension " +
                                   std::to_string(op.dim()));
  const Resolvent r(op, shift.z, policy);
  return r.solve(op.form().mass_matrix() * f);
}

eigen::Eigenpairs lowest_eigenpairs(const AssembledOperator& op, int k) {
  return eigen::smallest_eigenpairs(op.form().form_matrix(), op.form().mass_matrix(), k);
}

double resolvent_diff_norm(const Resolvent& r1, const Resolvent& r2, int iterations, std::uint64_t seed) {
  require_same_ambient(r1, r2);
  if (iterations < 1) throw ValidationError("iterations", "need at least one iteration");
  const AmbientSpace& amb = *r1.ambient();
  Vector x = start_vector(amb.dim(), seed);
  x /= mass_norm(amb, x);
  double best = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const Vector y = r1.apply(x) - r2.apply(x);
    const double norm = mass_norm(amb, y);
    best = std::max(best, norm);
    if (norm == 0.0) break;
    x = y / norm;
  }
  return best;
}

double resolvent_diff_norm(const AssembledOperator& op1, const AssembledOperator& op2, const Shift& shift,
                           int iterations, std::uint64_t seed, ShiftPolicy policy) {
  if (op1.form().ambient()->dim() != op2.form().ambient()->dim())
    throw ValidationError("op2", "operators act on different ambient spaces");
  const Resolvent r1(op1, shift.z, policy);
  const Resolvent r2(op2, shift.z, policy);
  return resolvent_diff_norm(r1, r2, iterations, seed);
}

SpectralRange resolvent_difference_range(const Resolvent& r1, const Resolvent& r2, int max_steps,
                                         std::uint64_t seed) {
  require_same_ambient(r1, r2);
  const AmbientSpace& amb = *r1.ambient();
  const Eigen::Index n = amb.dim();
  const int steps = int(std::min<Eigen::Index>(n, max_steps));

  std::vector<Vector> basis;
  std::vector<double> alpha, beta;
  Vector v = start_vector(n, seed);
  v /= mass_norm(amb, v);
  double scale = 0.0;
  for (int j = 0; j < steps; ++j) {
    basis.push_back(v);
    Vector w = r1.apply(v) - r2.apply(v);
    scale = std::max(scale, mass_norm(amb, w));
    alpha.push_back(mass_inner(amb, w, v));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) w -= u * mass_inner(amb, u, w);
    const double b = mass_norm(amb, w);
    if (b <= 1e-12 * std::max(scale, 1e-300)) break;
    beta.push_back(b);
    v = w / b;
  }
  const Eigen::Index m = Eigen::Index(alpha.size());
  DenseMatrix t = DenseMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    t(i, i) = alpha[std::size_t(i)];
    if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[std::size_t(i)];
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(t, Eigen::EigenvaluesOnly);
  SpectralRange out{es.eigenvalues()(0), es.eigenvalues()(m - 1)};
  return out;
}

}  // namespace kreinlab
