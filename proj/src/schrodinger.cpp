#include "kreinlab/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kreinlab/eigensolver.hpp"
#include "kreinlab/errors.hpp"
#include "kreinlab/quadrature.hpp"

namespace kreinlab::schrodinger {

Mesh::Mesh(double half_length, int k_per_side, double grading_exponent)
    : half_length_(half_length), k_(k_per_side), grading_(grading_exponent) {
  if (!std::isfinite(half_length) || !(half_length > 0.0)) throw ValidationError("half_length", "must be > 0");
  if (k_per_side < 2) throw ValidationError("k_per_side", "need at least 2 elements per side");
  if (!std::isfinite(grading_exponent) || !(grading_exponent >= 1.0))
    throw ValidationError("grading_exponent", "must be >= 1");
  side_.resize(std::size_t(k_) + 1);
  for (int k = 0; k <= k_; ++k) side_[std::size_t(k)] = half_length_ * std::pow(double(k) / double(k_), grading_);
  side_.back() = half_length_;
  for (int k = 0; k < k_; ++k)
    if (!(side_[std::size_t(k) + 1] > side_[std::size_t(k)]))
      throw ValidationError("k_per_side", "mesh spacing underflows; reduce K or the grading exponent");
}

std::vector<double> Mesh::nodes() const {
  std::vector<double> out;
  out.reserve(std::size_t(2 * k_));
  for (int i = k_; i >= 1; --i) out.push_back(-side_[std::size_t(i)]);
  for (int i = 1; i <= k_; ++i) out.push_back(side_[std::size_t(i)]);
  return out;
}

Eigen::Index Mesh::ambient_index(int side, int i) const {
  if (i < 0 || i >= k_) throw ValidationError("node", "side node index out of range");
  if (side > 0) return Eigen::Index(k_) + i;
  return Eigen::Index(k_) - 1 - i;
}

double Mesh::coordinate(Eigen::Index j) const {
  if (j < 0 || j >= ambient_dim()) throw ValidationError("node", "ambient index out of range");
  if (j >= k_) return side_[std::size_t(j - k_)];
  return -side_[std::size_t(k_ - 1 - j)];
}

int Mesh::elements_below(double radius) const {
  int count = 0;
  for (int e = 0; e < k_ && side_[std::size_t(e) + 1] <= radius; ++e) ++count;
  return count;
}

Mesh build_mesh(double half_length, int k_per_side, double grading_exponent) {
  return Mesh(half_length, k_per_side, grading_exponent);
}

// ---------------------------------------------------------------------------

SingularPotential SingularPotential::power_law(double kappa, double beta) {
  if (!std::isfinite(kappa) || !(kappa > 0.0)) throw ValidationError("kappa", "must be > 0");
  if (!(beta >= 1.0 && beta <= 2.0)) throw ValidationError("beta", "must lie in [1, 2]");
  return SingularPotential{kappa, beta, false};
}

SingularPotential SingularPotential::zero_potential() { return SingularPotential{1.0, 1.0, true}; }

double SingularPotential::value(double x) const {
  if (zero) return 0.0;
  return coefficient() * std::pow(std::abs(x), -beta);
}

double RegularizingSequence::effective_level(double n) const {
  if (!(n > 0.0)) throw ValidationError("level", "cut-off level must be > 0");
  return permanent_cap ? std::min(n, *permanent_cap) : n;
}

double RegularizingSequence::value(double x, double n) const {
  return std::min(effective_level(n), base.value(x));
}

double max_resolved_level(const Mesh& mesh, const SingularPotential& potential, int min_elements) {
  if (potential.zero) return kFullPotential;
  const double radius = mesh.side_nodes()[std::size_t(std::min(min_elements, mesh.k_per_side()))];
  return potential.coefficient() * std::pow(radius, -potential.beta);
}

// ---------------------------------------------------------------------------

namespace {

struct ElementDofs {
  Eigen::Index left;   // ambient index of the node nearer the puncture (trace when e == 0)
  Eigen::Index right;  // -1 for the Dirichlet end
  double a, b;
};

template <class Fn>
void for_each_element(const Mesh& mesh, Fn&& fn) {
  const auto& x = mesh.side_nodes();
  const int k = mesh.k_per_side();
  for (int side : {-1, 1}) {
    for (int e = 0; e < k; ++e) {
      ElementDofs d{mesh.ambient_index(side, e), e + 1 < k ? mesh.ambient_index(side, e + 1) : -1,
                    x[std::size_t(e)], x[std::size_t(e) + 1]};
      fn(d, side);
    }
  }
}

bool is_trace(const Mesh& mesh, Eigen::Index j) { return j == mesh.trace_index(-1) || j == mesh.trace_index(1); }

// ambient index -> interior index (traces map to -1)
Eigen::Index interior_of(const Mesh& mesh, Eigen::Index j) {
  const Eigen::Index k = mesh.k_per_side();
  if (j < k - 1) return j;
  if (j <= k) return -1;
  return j - 2;
}

SparseMatrix restrict_to_interior(const Mesh& mesh, const std::vector<Triplet>& ambient) {
  std::vector<Triplet> t;
  t.reserve(ambient.size());
  for (const auto& e : ambient) {
    const Eigen::Index i = interior_of(mesh, e.row());
    const Eigen::Index j = interior_of(mesh, e.col());
    if (i >= 0 && j >= 0) t.emplace_back(int(i), int(j), e.value());
  }
  SparseMatrix out(mesh.interior_dim(), mesh.interior_dim());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrix from_triplets(Eigen::Index n, const std::vector<Triplet>& t) {
  SparseMatrix out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

void push_block(std::vector<Triplet>& t, const ElementDofs& d, double ll, double lr, double rr) {
  t.emplace_back(int(d.left), int(d.left), ll);
  if (d.right >= 0) {
    t.emplace_back(int(d.left), int(d.right), lr);
    t.emplace_back(int(d.right), int(d.left), lr);
    t.emplace_back(int(d.right), int(d.right), rr);
  }
}

SparseMatrix interior_embedding(const Mesh& mesh) {
  std::vector<Triplet> t;
  for (Eigen::Index j = 0; j < mesh.ambient_dim(); ++j) {
    const Eigen::Index i = interior_of(mesh, j);
    if (i >= 0) t.emplace_back(int(j), int(i), 1.0);
  }
  SparseMatrix e(mesh.ambient_dim(), mesh.interior_dim());
  e.setFromTriplets(t.begin(), t.end());
  return e;
}

// sinh(s (L - x)) / sinh(s L) without overflow.
double sinh_profile(double s, double length, double x) {
  return std::exp(-s * x) * (-std::expm1(-2.0 * s * (length - x))) / (-std::expm1(-2.0 * s * length));
}

}  // namespace

FemSystem assemble_stiffness_mass(const Mesh& mesh) {
  std::vector<Triplet> k, m;
  for_each_element(mesh, [&](const ElementDofs& d, int) {
    const double h = d.b - d.a;
    push_block(k, d, 1.0 / h, -1.0 / h, 1.0 / h);
    push_block(m, d, h / 3.0, h / 6.0, h / 3.0);
  });
  const Eigen::Index n = mesh.ambient_dim();
  auto ambient = std::make_shared<AmbientSpace>(AmbientSpace{from_triplets(n, m)});
  SparseMatrix stiffness = from_triplets(n, k);
  QuadraticForm friedrichs(restrict_to_interior(mesh, k), restrict_to_interior(mesh, m),
                           std::vector<DofKind>(std::size_t(mesh.interior_dim()), DofKind::interior),
                           interior_embedding(mesh), ambient);
  return FemSystem{mesh, std::move(ambient), std::move(stiffness), std::move(friedrichs)};
}

SparseMatrix potential_form(const Mesh& mesh, const RegularizingSequence& seq, double level, bool include_traces,
                            bool acknowledge_hardy) {
  const bool full = std::isinf(level) && !seq.permanent_cap;
  if (full && include_traces)
    throw DivergentIntegralError(
        "the uncut potential form is infinite on functions with a nonzero trace at the puncture");
  if (full && seq.base.beta >= 2.0 && !seq.base.zero && !acknowledge_hardy)
    throw ValidationError("beta", "the uncut beta = 2 form needs the Hardy regime acknowledged (kappa > 1)");
  const double effective = std::isinf(level) ? (seq.permanent_cap ? *seq.permanent_cap : level)
                                             : seq.effective_level(level);

  std::vector<Triplet> t;
  for_each_element(mesh, [&](const ElementDofs& d, int) {
    const auto blk =
        quadrature::cutoff_power_element(d.a, d.b, seq.base.coefficient(), seq.base.beta, effective);
    const bool left_is_trace = is_trace(mesh, d.left);
    if (left_is_trace && !include_traces) {
      if (d.right >= 0) t.emplace_back(int(d.right), int(d.right), blk.right_right);
      return;
    }
    if (!std::isfinite(blk.left_left) || !std::isfinite(blk.left_right))
      throw DivergentIntegralError("potential form diverges on a trace degree of freedom");
    push_block(t, d, blk.left_left, blk.left_right, blk.right_right);
  });
  if (include_traces) return from_triplets(mesh.ambient_dim(), t);
  return restrict_to_interior(mesh, t);
}

DeficiencyBasis deficiency_basis(const Mesh& mesh, double eta) {
  if (!std::isfinite(eta) || !(eta < 0.0)) throw ValidationError("eta", "must be finite and < 0");
  const double s = std::sqrt(-eta);
  const double length = mesh.half_length();
  DeficiencyBasis out;
  out.eta = eta;
  out.vectors = DenseMatrix::Zero(mesh.ambient_dim(), 2);
  out.kinds = {DofKind::deficiency_minus, DofKind::deficiency_plus};
  const auto& x = mesh.side_nodes();
  for (int i = 0; i < mesh.k_per_side(); ++i) {
    const double v = i == 0 ? 1.0 : sinh_profile(s, length, x[std::size_t(i)]);
    out.vectors(mesh.ambient_index(-1, i), 0) = v;
    out.vectors(mesh.ambient_index(1, i), 1) = v;
  }
  return out;
}

double deficiency_residual(const FemSystem& fem, const DeficiencyBasis& deficiency, double min_distance) {
  const SparseMatrix& mass = fem.ambient->mass;
  double worst = 0.0;
  for (Eigen::Index c = 0; c < deficiency.dim(); ++c) {
    const Vector h = deficiency.vectors.col(c);
    const Vector r = fem.stiffness * h - deficiency.eta * (mass * h);
    const Vector mh = mass * h;
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < fem.mesh.ambient_dim(); ++j) {
      if (is_trace(fem.mesh, j) || std::abs(fem.mesh.coordinate(j)) < min_distance) continue;
      num = std::max(num, std::abs(r(j)));
      den = std::max(den, std::abs(mh(j)));
    }
    if (den > 0.0) worst = std::max(worst, num / den);
  }
  return worst;
}

FormBoundEstimate estimate_form_bound(const Mesh& mesh, const SingularPotential& potential,
                                      const std::vector<double>& b_grid) {
  if (b_grid.empty()) throw ValidationError("b_grid", "empty grid");
  FormBoundEstimate out;
  if (potential.zero) {
    out.a = 0.0;
    out.b = 0.0;
    for (double b : b_grid) out.trade_off.emplace_back(b, 0.0);
    return out;
  }
  const FemSystem fem = assemble_stiffness_mass(mesh);
  const SparseMatrix w = potential_form(mesh, RegularizingSequence{potential, std::nullopt}, kFullPotential,
                                        false, /*acknowledge_hardy=*/true);
  const SparseMatrix neg_w = SparseMatrix(-w);
  out.a = std::numeric_limits<double>::infinity();
  for (double b : b_grid) {
    const SparseMatrix metric = SparseMatrix(fem.friedrichs.form_matrix() + b * fem.friedrichs.mass_matrix());
    if (!linalg::is_positive_definite(metric))
      throw NumericalError("indefinite_pencil", "K + b M is not positive definite", {{"b", b}});
    const double a = -eigen::smallest_eigenpairs(neg_w, metric, 1).values(0);
    out.trade_off.emplace_back(b, a);
    if (a < out.a) {
      out.a = a;
      out.b = b;
    }
  }
  out.alpha_max = out.a > 0.0 ? 1.0 / out.a : std::numeric_limits<double>::infinity();
  return out;
}

AdmissibilityCurve admissibility_curve(const Mesh& mesh, const RegularizingSequence& seq, const Vector& h,
                                       std::vector<double> levels) {
  if (h.size() != mesh.ambient_dim()) throw ValidationError("h", "expected an ambient mesh vector");
  if (levels.empty()) throw ValidationError("levels", "empty schedule");
  for (double n : levels)
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("levels", "levels must be finite and > 0");
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  AdmissibilityCurve out;
  for (double n : levels) {
    const SparseMatrix w = potential_form(mesh, seq, n, true);
    out.points.emplace_back(n, h.dot(w * h));
  }
  const double top = levels.back();
  const double radius = quadrature::cutoff_radius(seq.base.coefficient(), seq.base.beta, seq.effective_level(top));
  const int inside = mesh.elements_below(radius);
  if (!seq.base.zero && inside < 5) {
    out.reliable = false;
    std::ostringstream msg;
    msg << "cut-off radius " << radius << " at level " << top << " contains only " << inside
        << " elements (need 5); values are unreliable";
    out.warnings.push_back(msg.str());
  }
  return out;
}

Vector interpolate(const Mesh& mesh, double (*f)(double), double trace_minus, double trace_plus) {
  Vector out(mesh.ambient_dim());
  for (Eigen::Index j = 0; j < mesh.ambient_dim(); ++j) out(j) = f(mesh.coordinate(j));
  out(mesh.trace_index(-1)) = trace_minus;
  out(mesh.trace_index(1)) = trace_plus;
  return out;
}

}  // namespace kreinlab::schrodinger
