#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kreinlab/extension_forms.hpp"

namespace kreinlab::schrodinger {

/// Symmetric graded mesh on [-L, 0) u (0, L]. Per side the k-th node from
/// the puncture sits at L (k/K)^g; the puncture carries two trace slots
/// (0- and 0+) and the ends +-L are Dirichlet.
///
/// Ambient degrees of freedom, ascending in x:
///   -x_{K-1}, ..., -x_1, 0-, 0+, x_1, ..., x_{K-1}   (2K in total)
class Mesh {
 public:
  Mesh(double half_length, int k_per_side, double grading_exponent);

  double half_length() const noexcept { return half_length_; }
  int k_per_side() const noexcept { return k_; }
  double grading_exponent() const noexcept { return grading_; }

  /// x_0 = 0, x_1, ..., x_K = L on the positive side.
  const std::vector<double>& side_nodes() const noexcept { return side_; }
  /// All mesh nodes in [-L, L] except 0, ascending (Dirichlet ends included).
  std::vector<double> nodes() const;
  double min_spacing() const noexcept { return side_[1] - side_[0]; }

  Eigen::Index ambient_dim() const noexcept { return 2 * Eigen::Index(k_); }
  Eigen::Index interior_dim() const noexcept { return 2 * Eigen::Index(k_) - 2; }
  /// Ambient index of side node i (0 = trace, 1..K-1 interior) on side +1 / -1.
  Eigen::Index ambient_index(int side, int i) const;
  Eigen::Index trace_index(int side) const { return ambient_index(side, 0); }
  /// Signed coordinate of an ambient degree of freedom (traces report 0).
  double coordinate(Eigen::Index ambient) const;
  /// Number of elements per side lying entirely inside [0, radius].
  int elements_below(double radius) const;

 private:
  double half_length_;
  int k_;
  double grading_;
  std::vector<double> side_;
};

Mesh build_mesh(double half_length, int k_per_side, double grading_exponent);

/// V(x) = 1 / (4 kappa) |x|^(-beta); the zero potential is the kappa -> inf limit.
struct SingularPotential {
  double kappa = 1.0;
  double beta = 1.0;
  bool zero = false;

  static SingularPotential power_law(double kappa, double beta);
  static SingularPotential zero_potential();

  double coefficient() const { return zero ? 0.0 : 1.0 / (4.0 * kappa); }
  double value(double x) const;
};

/// Level meaning "no cut-off": the singular potential itself.
inline constexpr double kFullPotential = std::numeric_limits<double>::infinity();

/// V_n(x) = min(n, V(x)). An optional permanent cap turns the sequence into
/// a bounded substitute min(n, cap, V).
struct RegularizingSequence {
  SingularPotential base;
  std::optional<double> permanent_cap;

  double effective_level(double n) const;
  double value(double x, double n) const;
};

/// Largest level n whose cut-off radius still contains `min_elements`
/// elements of the mesh.
double max_resolved_level(const Mesh& mesh, const SingularPotential& potential, int min_elements = 5);

/// P1 matrices of the model. `friedrichs` is the form of the Dirichlet
/// (at 0 and +-L) Laplacian over the interior hats; `stiffness` is the
/// ambient stiffness with free traces.
struct FemSystem {
  Mesh mesh;
  std::shared_ptr<const AmbientSpace> ambient;
  SparseMatrix stiffness;
  QuadraticForm friedrichs;
};

FemSystem assemble_stiffness_mass(const Mesh& mesh);

/// Matrix of int min(level, V) phi_i phi_j over the interior hats, or over
/// all ambient hats when include_traces is set. Exact elementwise
/// quadrature. The uncut form (kFullPotential) diverges on the traces and
/// needs acknowledge_hardy for beta = 2.
SparseMatrix potential_form(const Mesh& mesh, const RegularizingSequence& seq, double level, bool include_traces,
                            bool acknowledge_hardy = false);

/// h_-(x), h_+(x): sinh(s (L - |x|)) / sinh(s L), s = sqrt(-eta), each on one
/// side with trace 1 at the puncture.
DeficiencyBasis deficiency_basis(const Mesh& mesh, double eta);

/// max |((K - eta M) h)_i| / max |(M h)_i| over interior nodes with |x| >= min_distance.
double deficiency_residual(const FemSystem& fem, const DeficiencyBasis& deficiency, double min_distance);

struct FormBoundEstimate {
  double a = 0.0;
  double b = 0.0;
  double alpha_max = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> trade_off;  // (b, a(b)) over the grid
};

inline const std::vector<double> kDefaultBGrid{0.0, 0.5, 1.0, 2.0, 4.0, 8.0};

/// (V f, f) <= a (f', f') + b (f, f) on the trace-free space: a(b) is the
/// largest eigenvalue of W_full against K + b M; returns the grid point
/// with the smallest a.
FormBoundEstimate estimate_form_bound(const Mesh& mesh, const SingularPotential& potential,
                                      const std::vector<double>& b_grid = kDefaultBGrid);

struct AdmissibilityCurve {
  std::vector<std::pair<double, double>> points;  // (n, (V_n h, h)), ascending n
  bool reliable = true;
  std::vector<std::string> warnings;
};

AdmissibilityCurve admissibility_curve(const Mesh& mesh, const RegularizingSequence& seq, const Vector& h,
                                       std::vector<double> levels);

/// Ambient nodal interpolant of a function of x; the traces take f(0-) and f(0+).
Vector interpolate(const Mesh& mesh, double (*f)(double), double trace_minus, double trace_plus);

}  // namespace kreinlab::schrodinger
