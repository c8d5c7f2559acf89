#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kreinlab/linalg.hpp"

namespace kreinlab {

/// Tag of a degree of freedom in a form basis.
enum class DofKind { interior, deficiency_plus, deficiency_minus, deficiency };

std::string_view to_string(DofKind kind);

/// The space every operator of one experiment acts on: coefficients of a
/// fixed basis together with its Gram matrix. Resolvents of operators built
/// over different sub-bases are compared here.
struct AmbientSpace {
  SparseMatrix mass;

  Eigen::Index dim() const { return mass.rows(); }
};

/// A closed semibounded form represented by its matrix and the mass matrix
/// over a named basis. `embedding` maps basis coefficients to ambient
/// coefficients (one column per basis function).
class QuadraticForm {
 public:
  QuadraticForm(SparseMatrix form, SparseMatrix mass, std::vector<DofKind> labels, SparseMatrix embedding,
                std::shared_ptr<const AmbientSpace> ambient, std::optional<double> eta_tag = std::nullopt);

  Eigen::Index dim() const noexcept { return form_.rows(); }
  const SparseMatrix& form_matrix() const noexcept { return form_; }
  const SparseMatrix& mass_matrix() const noexcept { return mass_; }
  const std::vector<DofKind>& labels() const noexcept { return labels_; }
  std::optional<double> eta_tag() const noexcept { return eta_tag_; }
  const SparseMatrix& embedding() const noexcept { return embedding_; }
  const std::shared_ptr<const AmbientSpace>& ambient() const noexcept { return ambient_; }

  /// Quadratic value u^T F u.
  double value(const Vector& u) const;
  /// Sesquilinear value recovered from quadratic values by polarization.
  double polarized(const Vector& u, const Vector& v) const;

 private:
  SparseMatrix form_;
  SparseMatrix mass_;
  std::vector<DofKind> labels_;
  SparseMatrix embedding_;
  std::shared_ptr<const AmbientSpace> ambient_;
  std::optional<double> eta_tag_;
};

/// Representatives of ker(A* - eta): one ambient column per direction.
struct DeficiencyBasis {
  double eta = -1.0;
  DenseMatrix vectors;
  std::vector<DofKind> kinds;

  Eigen::Index dim() const { return vectors.cols(); }
  /// Column with the given tag; throws if absent.
  Vector column(DofKind kind) const;
};

/// Parameter of a semibounded extension: a nonnegative form q on a subspace
/// of the deficiency space. Friedrichs is the empty subspace, Krein(eta) the
/// zero form on the whole deficiency space.
class ExtensionSpec {
 public:
  struct Friedrichs {};
  struct Krein {
    double eta;
  };
  struct General {
    double eta;
    DenseMatrix subspace;  // deficiency-basis coefficients, one column per direction
    DenseMatrix q;         // symmetric PSD, subspace.cols() square
  };

  static ExtensionSpec friedrichs();
  static ExtensionSpec krein(double eta);
  static ExtensionSpec general(double eta, DenseMatrix subspace, DenseMatrix q);

  const std::variant<Friedrichs, Krein, General>& variant() const noexcept { return v_; }
  bool is_friedrichs() const noexcept { return std::holds_alternative<Friedrichs>(v_); }
  bool is_krein() const noexcept { return std::holds_alternative<Krein>(v_); }
  std::optional<double> eta() const;
  std::string tag() const;

  /// Subspace (columns over a deficiency basis of dimension `deficiency_dim`)
  /// and q matrix in General form.
  DenseMatrix subspace(Eigen::Index deficiency_dim) const;
  DenseMatrix q_matrix(Eigen::Index deficiency_dim) const;

 private:
  explicit ExtensionSpec(std::variant<Friedrichs, Krein, General> v) : v_(std::move(v)) {}
  std::variant<Friedrichs, Krein, General> v_;
};

/// A semibounded self-adjoint operator given by its form, the lower-bound
/// estimate of the pencil, and the extension it came from. The leading
/// `interior_dim` basis functions are those of the Friedrichs form domain.
class AssembledOperator {
 public:
  AssembledOperator(QuadraticForm form, ExtensionSpec spec, Eigen::Index interior_dim, double coupling = 0.0);

  const QuadraticForm& form() const noexcept { return form_; }
  const ExtensionSpec& spec() const noexcept { return spec_; }
  double lower_bound_estimate() const noexcept { return lower_bound_; }
  Eigen::Index interior_dim() const noexcept { return interior_dim_; }
  Eigen::Index dim() const noexcept { return form_.dim(); }
  /// Coupling alpha of the potential subtracted so far (0 if unperturbed).
  double coupling() const noexcept { return coupling_; }

 private:
  QuadraticForm form_;
  ExtensionSpec spec_;
  Eigen::Index interior_dim_;
  double coupling_;
  double lower_bound_;
};

/// Builds the form of the extension selected by `spec` on
/// {interior basis} u {selected deficiency directions}:
///   nu(g + h) = nu_F(g) + q(h) + 2 eta (g, h) + eta (h, h).
AssembledOperator assemble_extension(const QuadraticForm& friedrichs_form, const DeficiencyBasis& deficiency,
                                     const ExtensionSpec& spec);

/// The Friedrichs form wrapped as an (unperturbed) operator.
AssembledOperator friedrichs_operator(const QuadraticForm& friedrichs_form);

/// H = op - alpha * W with W given over the operator's basis.
AssembledOperator perturb_form(const AssembledOperator& op, const SparseMatrix& potential_form, double alpha);

/// P^T W P: an ambient matrix expressed over the operator's basis.
SparseMatrix project_to_basis(const AssembledOperator& op, const SparseMatrix& ambient_matrix);

/// Expresses an unperturbed extension through the deficiency space at
/// eta_prime. Throws NumericalError("decomposition_singular") when a
/// deficiency direction lies numerically inside the Friedrichs domain.
ExtensionSpec reparameterize_form(const AssembledOperator& op, const QuadraticForm& friedrichs_at,
                                  const DeficiencyBasis& deficiency_at, double eta_prime);

/// Closed-formula value nu_F(g) + q(h) + 2 eta (g, h) + eta (h, h) for
/// g given by interior coefficients and h = sum_i y_i * (subspace direction i).
double correspondence_value(const QuadraticForm& friedrichs_form, const DeficiencyBasis& deficiency,
                            const ExtensionSpec& spec, const Vector& g, const Vector& y);

/// Splits an ambient vector s = E g + H c with E the (orthonormal)
/// embedding of the Friedrichs basis and H the deficiency vectors.
struct Decomposition {
  Vector interior;     // g
  Vector deficiency;   // c
};
Decomposition decompose(const SparseMatrix& interior_embedding, const DenseMatrix& deficiency_vectors,
                        const Vector& s);

/// Largest relative entry difference between the forms of two operators
/// spanning the same space with the same interior block, after expressing
/// `reassembled` in the basis of `original`.
double round_trip_error(const AssembledOperator& original, const AssembledOperator& reassembled);

}  // namespace kreinlab
