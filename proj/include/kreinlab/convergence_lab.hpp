#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kreinlab/config.hpp"
#include "kreinlab/extension_forms.hpp"
#include "kreinlab/schrodinger.hpp"
#include "kreinlab/spectral.hpp"

namespace kreinlab::lab {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct ReportRow {
  double n = kMissing;
  std::string spec;
  std::string vector_id;
  double sre_error = kMissing;
  double norm_resolvent_est = kMissing;
  double admissibility_plus = kMissing;
  double admissibility_minus = kMissing;
  std::array<double, 3> eig{kMissing, kMissing, kMissing};
};

struct ConvergenceReport {
  std::string kind;  // convergence | admissibility | spectrum
  ExperimentConfig config;
  std::vector<ReportRow> rows;  // sorted by n
  std::vector<std::string> warnings;
  nlohmann::json metadata = nlohmann::json::object();

  /// Rows of one (spec, vector) series in schedule order.
  std::vector<ReportRow> series(const std::string& spec, const std::string& vector_id = {}) const;
};

/// A validated experiment: the mesh, the unperturbed extensions, the
/// reference form sum and the derived constants (alpha, z, schedule).
/// Immutable after construction and safe to share between workers.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const schrodinger::FemSystem& fem() const noexcept { return fem_; }
  const schrodinger::Mesh& mesh() const noexcept { return fem_.mesh; }
  const DeficiencyBasis& deficiency() const noexcept { return deficiency_; }
  const schrodinger::RegularizingSequence& sequence() const noexcept { return sequence_; }
  const std::optional<schrodinger::FormBoundEstimate>& form_bound() const noexcept { return bound_; }
  double alpha() const noexcept { return alpha_; }
  double b() const noexcept { return b_; }
  double z() const noexcept { return z_; }
  /// eta - alpha b: the bound the shift has to stay below (by the margin).
  double uniform_lower_bound() const noexcept { return config_.eta - alpha_ * b_; }
  const std::vector<double>& schedule() const noexcept { return schedule_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  ExtensionSpec spec(const std::string& name) const;
  const AssembledOperator& base(const std::string& name) const;
  /// H_{alpha,n} = extension - alpha W_n.
  AssembledOperator sequence_operator(const std::string& name, double n) const;
  AssembledOperator sequence_operator(const std::string& name, const SparseMatrix& cutoff_ambient) const;
  /// The form sum of the Friedrichs extension and -alpha V.
  const AssembledOperator& reference() const noexcept { return *reference_; }
  /// W_n over all ambient hats (traces included).
  SparseMatrix cutoff_form(double n) const;
  ShiftPolicy policy(const std::string& name) const;

  /// random0.., bump, trace: fixed ambient test vectors.
  const std::vector<std::pair<std::string, Vector>>& test_vectors() const noexcept { return vectors_; }

 private:
  ExperimentConfig config_;
  schrodinger::FemSystem fem_;
  DeficiencyBasis deficiency_;
  schrodinger::RegularizingSequence sequence_;
  std::optional<schrodinger::FormBoundEstimate> bound_;
  double alpha_ = 0.0;
  double b_ = 0.0;
  double z_ = 0.0;
  std::vector<double> schedule_;
  std::vector<std::string> warnings_;
  std::vector<std::pair<std::string, AssembledOperator>> bases_;
  std::optional<AssembledOperator> reference_;
  std::vector<std::pair<std::string, Vector>> vectors_;
};

/// Strong-resolvent errors ||R_n f - R f||_M / ||f||_M per test vector, the
/// norm estimate of R_n - R, admissibility values and lowest eigenvalues,
/// for every (n, spec).
ConvergenceReport run_convergence(const ExperimentConfig& config);

/// (V_n h, h) for h_+ and h_- with a fitted growth law and a verdict
/// ("admissible-divergent" or "not admissible").
ConvergenceReport run_admissibility(const ExperimentConfig& config);

/// Lowest k (<= 5) eigenvalues of every H_{alpha,n}, with the ordering
/// check Krein <= Friedrichs eigenvalue by eigenvalue.
ConvergenceReport run_spectrum_tracking(const ExperimentConfig& config, int k);

/// Smallest eigenvalues of R_Krein - R_General, R_General - R_Friedrichs and
/// R_Krein - R_Friedrichs for the sequence operators at level n, evaluated
/// at lambda = min(lower bounds) - 1 where all three resolvents are positive.
struct OrderingCheck {
  double n = 0.0;
  double lambda = 0.0;
  double krein_minus_general = 0.0;
  double general_minus_friedrichs = 0.0;
  double krein_minus_friedrichs = 0.0;
};
OrderingCheck resolvent_ordering(const Experiment& experiment, double n);

/// Least-squares line y = intercept + slope x with its correlation coefficient.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Decades 10, 100, ... up to 1e6, stopping at the largest level whose
/// cut-off radius the mesh resolves.
std::vector<double> default_schedule(const schrodinger::Mesh& mesh, const schrodinger::RegularizingSequence& seq);

/// Worker cap: KREINLAB_THREADS if set (>= 1), else the hardware concurrency.
unsigned worker_threads();

}  // namespace kreinlab::lab
