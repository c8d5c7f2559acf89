#include "kreinlab/extension_forms.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kreinlab/eigensolver.hpp"
#include "kreinlab/errors.hpp"

namespace kreinlab {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-12;

void require_eta(double eta, const char* field) {
  if (!std::isfinite(eta) || !(eta < 0.0)) throw ValidationError(field, "eta must be finite and < 0");
}

bool same_eta(double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(std::abs(a), std::abs(b)); }

SparseMatrix symmetrized(const SparseMatrix& a) {
  return SparseMatrix(0.5 * (a + SparseMatrix(a.transpose())));
}

// Embedding [E, S] with S dense ambient columns.
SparseMatrix append_columns(const SparseMatrix& e, const DenseMatrix& s) {
  std::vector<Triplet> t;
  t.reserve(std::size_t(e.nonZeros() + s.size()));
  for (int k = 0; k < e.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(e, k); it; ++it) t.emplace_back(int(it.row()), int(it.col()), it.value());
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      if (s(i, j) != 0.0) t.emplace_back(int(i), int(e.cols() + j), s(i, j));
  SparseMatrix out(e.rows(), e.cols() + s.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

DofKind direction_kind(const Vector& coefficients, const std::vector<DofKind>& kinds) {
  std::optional<DofKind> kind;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
    if (coefficients(i) == 0.0) continue;
    const DofKind k = i < Eigen::Index(kinds.size()) ? kinds[std::size_t(i)] : DofKind::deficiency;
    if (kind && *kind != k) return DofKind::deficiency;
    kind = k;
  }
  return kind.value_or(DofKind::deficiency);
}

void check_deficiency(const QuadraticForm& friedrichs_form, const DeficiencyBasis& deficiency) {
  require_eta(deficiency.eta, "deficiency.eta");
  if (deficiency.vectors.rows() != friedrichs_form.embedding().rows())
    throw ValidationError("deficiency", "deficiency vectors do not live in the ambient space of the Friedrichs form");
}

}  // namespace

std::string_view to_string(DofKind kind) {
  switch (kind) {
    case DofKind::interior: return "interior";
    case DofKind::deficiency_plus: return "deficiency:+";
    case DofKind::deficiency_minus: return "deficiency:-";
    case DofKind::deficiency: return "deficiency";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

QuadraticForm::QuadraticForm(SparseMatrix form, SparseMatrix mass, std::vector<DofKind> labels,
                             SparseMatrix embedding, std::shared_ptr<const AmbientSpace> ambient,
                             std::optional<double> eta_tag)
    : form_(std::move(form)),
      mass_(std::move(mass)),
      labels_(std::move(labels)),
      embedding_(std::move(embedding)),
      ambient_(std::move(ambient)),
      eta_tag_(eta_tag) {
  const Eigen::Index n = form_.rows();
  if (n == 0) throw ValidationError("form_matrix", "empty form");
  if (form_.cols() != n || mass_.rows() != n || mass_.cols() != n)
    throw ValidationError("mass_matrix", "form and mass must be square and of equal dimension");
  if (Eigen::Index(labels_.size()) != n) throw ValidationError("basis_labels", "one label per degree of freedom");
  if (!ambient_) throw ValidationError("ambient", "missing ambient space");
  if (embedding_.cols() != n || embedding_.rows() != ambient_->dim())
    throw ValidationError("embedding", "embedding must map the basis into the ambient space");
  if (eta_tag_ && !(*eta_tag_ < 0.0)) throw ValidationError("eta_tag", "eta must be < 0");
  if (linalg::relative_asymmetry(form_) > kSymmetryTolerance)
    throw ValidationError("form_matrix", "not symmetric to 1e-12 relative tolerance");
  if (linalg::relative_asymmetry(mass_) > kSymmetryTolerance)
    throw ValidationError("mass_matrix", "not symmetric to 1e-12 relative tolerance");
  if (!linalg::is_positive_definite(mass_)) throw ValidationError("mass_matrix", "not positive definite");
  form_.makeCompressed();
  mass_.makeCompressed();
}

double QuadraticForm::value(const Vector& u) const {
  if (u.size() != dim()) throw ValidationError("u", "dimension mismatch");
  return u.dot(form_ * u);
}

double QuadraticForm::polarized(const Vector& u, const Vector& v) const {
  return 0.25 * (value(u + v) - value(u - v));
}

Vector DeficiencyBasis::column(DofKind kind) const {
  for (std::size_t i = 0; i < kinds.size(); ++i)
    if (kinds[i] == kind) return vectors.col(Eigen::Index(i));
  throw ValidationError("deficiency", std::string("no direction tagged ") + std::string(to_string(kind)));
}

// ---------------------------------------------------------------------------

ExtensionSpec ExtensionSpec::friedrichs() { return ExtensionSpec(Friedrichs{}); }

ExtensionSpec ExtensionSpec::krein(double eta) {
  require_eta(eta, "eta");
  return ExtensionSpec(Krein{eta});
}

ExtensionSpec ExtensionSpec::general(double eta, DenseMatrix subspace, DenseMatrix q) {
  require_eta(eta, "eta");
  if (q.rows() != q.cols() || q.rows() != subspace.cols())
    throw ValidationError("q_matrix", "q_matrix must be square with one row per subspace vector");
  if (subspace.cols() > 0 && linalg::column_rank(subspace) != subspace.cols())
    throw ValidationError("subspace", "subspace vectors are linearly dependent");
  if (linalg::relative_asymmetry(q) > kSymmetryTolerance)
    throw ValidationError("q_matrix", "q_matrix is not symmetric");
  if (q.rows() > 0) {
    const double scale = linalg::max_abs_diagonal(q);
    if (linalg::min_eigenvalue(q) < -kPsdTolerance * scale || (scale == 0.0 && q.cwiseAbs().maxCoeff() > 0.0))
      throw ValidationError("q_matrix", "q_matrix is not positive semidefinite");
  }
  return ExtensionSpec(General{eta, std::move(subspace), std::move(q)});
}

std::optional<double> ExtensionSpec::eta() const {
  if (const auto* k = std::get_if<Krein>(&v_)) return k->eta;
  if (const auto* g = std::get_if<General>(&v_)) return g->eta;
  return std::nullopt;
}

std::string ExtensionSpec::tag() const {
  if (is_friedrichs()) return "friedrichs";
  if (is_krein()) return "krein";
  return "general";
}

DenseMatrix ExtensionSpec::subspace(Eigen::Index deficiency_dim) const {
  if (is_friedrichs()) return DenseMatrix(deficiency_dim, 0);
  if (is_krein()) return DenseMatrix::Identity(deficiency_dim, deficiency_dim);
  return std::get<General>(v_).subspace;
}

DenseMatrix ExtensionSpec::q_matrix(Eigen::Index deficiency_dim) const {
  if (is_friedrichs()) return DenseMatrix(0, 0);
  if (is_krein()) return DenseMatrix::Zero(deficiency_dim, deficiency_dim);
  return std::get<General>(v_).q;
}

// ---------------------------------------------------------------------------

AssembledOperator::AssembledOperator(QuadraticForm form, ExtensionSpec spec, Eigen::Index interior_dim,
                                     double coupling)
    : form_(std::move(form)), spec_(std::move(spec)), interior_dim_(interior_dim), coupling_(coupling) {
  lower_bound_ = eigen::smallest_eigenpairs(form_.form_matrix(), form_.mass_matrix(), 1).values(0);
}

AssembledOperator friedrichs_operator(const QuadraticForm& friedrichs_form) {
  return AssembledOperator(friedrichs_form, ExtensionSpec::friedrichs(), friedrichs_form.dim());
}

AssembledOperator assemble_extension(const QuadraticForm& friedrichs_form, const DeficiencyBasis& deficiency,
                                     const ExtensionSpec& spec) {
  if (spec.is_friedrichs()) return friedrichs_operator(friedrichs_form);

  check_deficiency(friedrichs_form, deficiency);
  const double eta = *spec.eta();
  if (!same_eta(eta, deficiency.eta))
    throw ValidationError("eta", "spec eta " + std::to_string(eta) + " differs from deficiency basis eta " +
                                     std::to_string(deficiency.eta));
  const DenseMatrix coeffs = spec.subspace(deficiency.dim());
  if (coeffs.rows() != deficiency.dim())
    throw ValidationError("subspace", "subspace vectors have " + std::to_string(coeffs.rows()) +
                                          " coefficients, deficiency basis has dimension " +
                                          std::to_string(deficiency.dim()));
  const DenseMatrix q = spec.q_matrix(deficiency.dim());

  const SparseMatrix& ambient_mass = friedrichs_form.ambient()->mass;
  const DenseMatrix directions = deficiency.vectors * coeffs;          // ambient columns
  const DenseMatrix m_directions = ambient_mass * directions;
  const DenseMatrix cross = friedrichs_form.embedding().transpose() * m_directions;  // (phi_i, h_j)
  DenseMatrix gram = directions.transpose() * m_directions;
  gram = 0.5 * (gram + gram.transpose()).eval();

  SparseMatrix form = linalg::symmetric_block(friedrichs_form.form_matrix(), eta * cross, q + eta * gram);
  SparseMatrix mass = linalg::symmetric_block(friedrichs_form.mass_matrix(), cross, gram);

  std::vector<DofKind> labels = friedrichs_form.labels();
  for (Eigen::Index j = 0; j < coeffs.cols(); ++j) labels.push_back(direction_kind(coeffs.col(j), deficiency.kinds));

  QuadraticForm assembled(std::move(form), std::move(mass), std::move(labels),
                          append_columns(friedrichs_form.embedding(), directions), friedrichs_form.ambient(), eta);
  return AssembledOperator(std::move(assembled), spec, friedrichs_form.dim());
}

SparseMatrix project_to_basis(const AssembledOperator& op, const SparseMatrix& ambient_matrix) {
  const SparseMatrix& p = op.form().embedding();
  if (ambient_matrix.rows() != p.rows() || ambient_matrix.cols() != p.rows())
    throw ValidationError("potential_form", "ambient matrix does not match the ambient space");
  const SparseMatrix wp = ambient_matrix * p;
  return symmetrized(SparseMatrix(p.transpose() * wp));
}

AssembledOperator perturb_form(const AssembledOperator& op, const SparseMatrix& potential_form, double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) throw ValidationError("alpha", "coupling must be >= 0");
  if (potential_form.rows() != op.dim() || potential_form.cols() != op.dim())
    throw ValidationError("potential_form", "dimension " + std::to_string(potential_form.rows()) +
                                                " does not match operator dimension " + std::to_string(op.dim()));
  if (alpha == 0.0) return op;
  if (linalg::relative_asymmetry(potential_form) > kSymmetryTolerance)
    throw ValidationError("potential_form", "not symmetric");
  const QuadraticForm& f = op.form();
  QuadraticForm perturbed(SparseMatrix(f.form_matrix() - alpha * potential_form), f.mass_matrix(), f.labels(),
                          f.embedding(), f.ambient(), f.eta_tag());
  return AssembledOperator(std::move(perturbed), op.spec(), op.interior_dim(), op.coupling() + alpha);
}

// ---------------------------------------------------------------------------

Decomposition decompose(const SparseMatrix& e, const DenseMatrix& h, const Vector& s) {
  if (e.rows() != s.size() || h.rows() != s.size())
    throw ValidationError("decompose", "ambient dimension mismatch");
  const SparseMatrix ete = SparseMatrix(e.transpose() * e);
  const SparseMatrix identity = [&] {
    SparseMatrix id(ete.rows(), ete.cols());
    id.setIdentity();
    return id;
  }();
  if (ete.rows() > 0 && (ete - identity).norm() > 1e-10 * std::sqrt(double(ete.rows())))
    throw ValidationError("embedding", "Friedrichs embedding must have orthonormal columns");

  const Vector r = s - e * (e.transpose() * s);
  const DenseMatrix b = h - e * (e.transpose() * h);
  Decomposition out;
  if (h.cols() == 0) {
    out.deficiency = Vector(0);
  } else {
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(b);
    const double h_scale = h.colwise().norm().maxCoeff();
    const auto r_diag = qr.matrixQR().diagonal().cwiseAbs();
    const double smallest = r_diag.size() ? r_diag.minCoeff() : 0.0;
    if (qr.rank() < h.cols() || !(smallest > 1e-10 * h_scale))
      throw NumericalError("decomposition_singular",
                           "a deficiency direction lies in the Friedrichs form domain to working precision "
                           "(mesh too coarse?)",
                           {{"smallest_pivot", smallest}, {"scale", h_scale}});
    out.deficiency = qr.solve(r);
    const double miss = (b * out.deficiency - r).norm();
    if (miss > 1e-8 * std::max(s.norm(), 1e-300))
      throw NumericalError("decomposition_failed", "vector is not in span(Friedrichs basis, deficiency vectors)",
                           {{"residual", miss}});
  }
  out.interior = e.transpose() * (s - h * out.deficiency);
  return out;
}

ExtensionSpec reparameterize_form(const AssembledOperator& op, const QuadraticForm& friedrichs_at,
                                  const DeficiencyBasis& deficiency_at, double eta_prime) {
  require_eta(eta_prime, "eta_prime");
  if (op.coupling() != 0.0) throw ValidationError("op", "reparameterization needs an unperturbed extension");
  check_deficiency(friedrichs_at, deficiency_at);
  if (!same_eta(eta_prime, deficiency_at.eta))
    throw ValidationError("deficiency_at", "deficiency basis was built for a different eta");
  if (friedrichs_at.dim() != op.interior_dim())
    throw ValidationError("friedrichs_at", "Friedrichs basis does not match the operator's interior block");
  if (op.spec().is_friedrichs()) return ExtensionSpec::friedrichs();

  const QuadraticForm& f = op.form();
  const Eigen::Index n_int = op.interior_dim();
  const Eigen::Index m = op.dim() - n_int;
  const SparseMatrix& e = friedrichs_at.embedding();

  DenseMatrix new_coeffs(deficiency_at.dim(), m);
  DenseMatrix x = DenseMatrix::Zero(op.dim(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector s = f.embedding().col(n_int + i);
    const Decomposition split = decompose(e, deficiency_at.vectors, s);
    new_coeffs.col(i) = split.deficiency;
    // h'_i = s_i - g_i, written in the operator's own basis.
    x.col(i).head(n_int) = -split.interior;
    x(n_int + i, i) = 1.0;
  }
  const SparseMatrix shifted = SparseMatrix(f.form_matrix() - eta_prime * f.mass_matrix());
  DenseMatrix q = x.transpose() * (shifted * x);
  q = 0.5 * (q + q.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(q);
  const double scale = std::max(linalg::max_abs_diagonal(q), 1e-300);
  if (es.eigenvalues()(0) < -1e-9 * scale)
    throw ValidationError("eta_prime", "extension is not bounded below by eta_prime; q would be indefinite");
  if (es.eigenvalues()(0) < 0.0) {
    const Vector clipped = es.eigenvalues().cwiseMax(0.0);
    q = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    q = 0.5 * (q + q.transpose()).eval();
  }
  return ExtensionSpec::general(eta_prime, std::move(new_coeffs), std::move(q));
}

double correspondence_value(const QuadraticForm& friedrichs_form, const DeficiencyBasis& deficiency,
                            const ExtensionSpec& spec, const Vector& g, const Vector& y) {
  const double base = friedrichs_form.value(g);
  if (spec.is_friedrichs()) return base;
  const double eta = *spec.eta();
  const DenseMatrix coeffs = spec.subspace(deficiency.dim());
  if (y.size() != coeffs.cols()) throw ValidationError("y", "one coefficient per subspace direction");
  const SparseMatrix& mass = friedrichs_form.ambient()->mass;
  const Vector g_ambient = friedrichs_form.embedding() * g;
  const Vector h = deficiency.vectors * (coeffs * y);
  const Vector mh = mass * h;
  const DenseMatrix q = spec.q_matrix(deficiency.dim());
  return base + y.dot(q * y) + 2.0 * eta * g_ambient.dot(mh) + eta * h.dot(mh);
}

double round_trip_error(const AssembledOperator& original, const AssembledOperator& reassembled) {
  if (original.dim() != reassembled.dim() || original.interior_dim() != reassembled.interior_dim())
    throw ValidationError("reassembled", "operators do not have matching bases");
  const Eigen::Index n_int = original.interior_dim();
  const Eigen::Index m = original.dim() - n_int;
  const SparseMatrix& p_orig = original.form().embedding();
  const SparseMatrix& p_new = reassembled.form().embedding();
  const SparseMatrix e = p_orig.leftCols(n_int);
  const DenseMatrix s_new = DenseMatrix(p_new.rightCols(m));

  // original coefficients [a; b] -> reassembled coefficients [a + G b; B b]
  DenseMatrix g(n_int, m), bmat(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Decomposition split = decompose(e, s_new, Vector(p_orig.col(n_int + i)));
    g.col(i) = split.interior;
    bmat.col(i) = split.deficiency;
  }

  const SparseMatrix& fo = original.form().form_matrix();
  const SparseMatrix& fn = reassembled.form().form_matrix();
  const SparseMatrix fo_ii = fo.topLeftCorner(n_int, n_int);
  const SparseMatrix fn_ii = fn.topLeftCorner(n_int, n_int);
  const DenseMatrix fo_id = DenseMatrix(fo.topRightCorner(n_int, m));
  const DenseMatrix fn_id = DenseMatrix(fn.topRightCorner(n_int, m));
  const DenseMatrix fo_dd = DenseMatrix(fo.bottomRightCorner(m, m));
  const DenseMatrix fn_dd = DenseMatrix(fn.bottomRightCorner(m, m));

  auto rel = [](const DenseMatrix& diff, const DenseMatrix& ref) {
    const double scale = ref.cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff.cwiseAbs().maxCoeff() / scale : diff.cwiseAbs().maxCoeff();
  };
  const double scale_ii = DenseMatrix(fo_ii).cwiseAbs().maxCoeff();
  const double err_ii = (fo_ii - fn_ii).norm() / std::max(scale_ii, 1e-300);
  const DenseMatrix t_id = fn_ii * g + fn_id * bmat;
  const DenseMatrix t_dd = g.transpose() * (fn_ii * g) + g.transpose() * fn_id * bmat +
                           bmat.transpose() * fn_id.transpose() * g + bmat.transpose() * fn_dd * bmat;
  return std::max({err_ii, rel(t_id - fo_id, fo_id), rel(t_dd - fo_dd, fo_dd)});
}

}  // namespace kreinlab
