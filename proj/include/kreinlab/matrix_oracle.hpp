#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kreinlab/extension_forms.hpp"

namespace kreinlab::oracle {

/// Finite-dimensional model of a symmetric operator with finite deficiency:
/// R^N with the Euclidean inner product, a symmetric PSD matrix A and a
/// subspace D of codimension d. The symmetric operator is A restricted to
/// D; its deficiency space at eta is N_eta = (A - eta)^{-1} D^perp, the set
/// of h with (u, (A - eta) h) = 0 for every u in D.
struct RandomInstance {
  int dim = 0;
  int codim = 0;
  std::uint64_t seed = 0;
  int redraws = 0;  // degenerate draws rejected before this one
  double eta = -1.0;
  DenseMatrix a;            // N x N, symmetric PSD
  DenseMatrix domain;       // N x (N - d), orthonormal basis of D
  DenseMatrix complement;   // N x d, orthonormal basis of D^perp
  std::shared_ptr<const AmbientSpace> ambient;

  /// The closure of u -> (A u, u) on D, over the orthonormal basis of D.
  QuadraticForm friedrichs_form() const;
  /// Unit-norm basis of N_eta at the given eta.
  DeficiencyBasis deficiency_at(double eta) const;
  DeficiencyBasis deficiency() const { return deficiency_at(eta); }
};

/// Draws A = G G^T / N, D from a random orthogonal matrix and eta in
/// [-2, -0.5). A draw whose basis [D, N_eta] has condition number above 1e8
/// is rejected and redrawn with the next sub-seed; `redraws` records how many.
RandomInstance generate_instance(int dim, int codim, std::uint64_t seed);

/// Instance with a prescribed A, domain basis (orthonormalized here) and eta.
RandomInstance make_instance(const DenseMatrix& a, const DenseMatrix& domain_basis, double eta,
                             std::uint64_t seed = 0);

/// A General spec with a random subspace of the deficiency space (dimension
/// drawn in 1..d) and a random PSD q.
ExtensionSpec random_general_spec(const RandomInstance& instance, std::uint64_t seed);

/// One failed check, reproducible from (seed, spec) alone.
struct CheckFailure {
  std::uint64_t seed = 0;
  std::string spec;
  std::string check;
  double residual = 0.0;
};

struct CheckResult {
  std::string check;
  double residual = 0.0;  // signed margin for ordering checks, error otherwise
  bool passed = true;
};

struct CorrespondenceReport {
  std::uint64_t seed = 0;
  std::string spec;
  std::vector<CheckResult> checks;

  bool passed() const;
  std::vector<CheckFailure> failures() const;
};

inline constexpr double kOracleTolerance = 1e-9;

/// Dense checks of one extension of the instance:
///   extension_property  the form agrees with (A u, v) for u in D, v in dom
///   lower_bound         lowest eigenvalue >= eta
///   friedrichs_maximal  R_spec - R_Friedrichs PSD at eta - 1
///   krein_minimal       R_Krein - R_spec PSD at eta - 1
///   krein_eigenvalue    eta has multiplicity >= d for the Krein extension
///   reparameterization  dim dom(q) unchanged at 2 eta, and the form is reproduced
CorrespondenceReport verify_correspondence(const RandomInstance& instance, const ExtensionSpec& spec,
                                           double tolerance = kOracleTolerance);

/// Dense resolvent (H - lambda)^{-1} of an extension of the instance, as an
/// N x N matrix on the ambient space.
DenseMatrix dense_resolvent(const AssembledOperator& op, double lambda);

struct SuiteResult {
  int instances = 0;
  int verifications = 0;
  int redraws = 0;
  std::vector<CheckFailure> failures;
};

/// seeds x {Friedrichs, Krein, `general_specs` random General specs}.
/// Seeds run on up to `threads` workers; results are ordered by seed.
SuiteResult run_suite(int seeds, int dim, int codim, int general_specs = 3, unsigned threads = 1,
                      std::uint64_t first_seed = 1);

/// One JSON object per line: {"seed", "spec", "check", "residual"}.
std::string to_json_lines(const std::vector<CheckFailure>& failures);

}  // namespace kreinlab::oracle
