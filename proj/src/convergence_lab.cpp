#include "kreinlab/convergence_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <mutex>
#include <thread>

#include "kreinlab/errors.hpp"

namespace kreinlab::lab {

namespace {

const std::vector<std::string> kSpecOrder{"friedrichs", "krein", "general"};

std::uint64_t vector_seed(std::uint64_t seed, int i) { return seed * 0x9E3779B97F4A7C15ULL + std::uint64_t(i) + 1; }

// Smooth bump of height 1 centred at |x| = 2 with half-width 1.5, on both sides.
double bump(double x) {
  const double t = (std::abs(x) - 2.0) / 1.5;
  if (std::abs(t) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * M_PI * t);
  return c * c;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

schrodinger::SingularPotential make_potential(const ExperimentConfig& c) {
  return c.zero_potential ? schrodinger::SingularPotential::zero_potential()
                          : schrodinger::SingularPotential::power_law(c.kappa, c.beta);
}

schrodinger::RegularizingSequence make_sequence(const ExperimentConfig& c) {
  if (c.cap && !(*c.cap > 0.0)) throw ValidationError("potential.cap", "must be > 0");
  return schrodinger::RegularizingSequence{make_potential(c), c.cap};
}

ExperimentConfig validated(ExperimentConfig c) {
  if (!std::isfinite(c.eta) || !(c.eta < 0.0)) throw ValidationError("experiment.eta", "must be finite and < 0");
  if (!(c.margin > 0.0)) throw ValidationError("experiment.margin", "must be > 0");
  if (c.alpha && !(*c.alpha >= 0.0)) throw ValidationError("experiment.alpha", "coupling must be >= 0");
  if (!(c.alpha_fraction >= 0.0 && c.alpha_fraction < 1.0))
    throw ValidationError("experiment.alpha_fraction", "must lie in [0, 1) so that α < 1/a");
  if (c.random_vectors < 0 || c.random_vectors > 16)
    throw ValidationError("experiment.random_vectors", "must lie in [0, 16]");
  if (c.norm_iterations < 1) throw ValidationError("experiment.norm_iterations", "must be >= 1");
  if (c.eigen_k < 1 || c.eigen_k > 5) throw ValidationError("experiment.eigen_k", "must lie in [1, 5]");
  if (!(c.general_q >= 0.0)) throw ValidationError("general.q", "must be >= 0 (q is a nonnegative form)");
  for (double n : c.schedule)
    if (!std::isfinite(n) || !(n > 0.0)) throw ValidationError("experiment.schedule", "levels must be finite and > 0");
  for (std::size_t i = 1; i < c.schedule.size(); ++i)
    if (!(c.schedule[i] > c.schedule[i - 1]))
      throw ValidationError("experiment.schedule", "levels must be strictly increasing");
  std::vector<std::string> specs;
  for (const auto& name : kSpecOrder)
    if (std::find(c.specs.begin(), c.specs.end(), name) != c.specs.end()) specs.push_back(name);
  if (specs.empty()) throw ValidationError("experiment.specs", "need at least one extension");
  c.specs = std::move(specs);
  return c;
}

std::vector<double> resolve_schedule(const ExperimentConfig& c, const schrodinger::Mesh& mesh,
                                     const schrodinger::RegularizingSequence& seq, std::vector<std::string>& warnings) {
  const double resolved = schrodinger::max_resolved_level(mesh, seq.base);
  if (c.schedule.empty()) {
    auto s = default_schedule(mesh, seq);
    if (s.back() > resolved) warnings.push_back("mesh does not resolve the cut-off radius at n = " + fmt(s.back()));
    return s;
  }
  if (c.schedule.back() > resolved)
    warnings.push_back("largest level " + fmt(c.schedule.back()) + " exceeds the mesh-resolved level " +
                       fmt(resolved) + " (fewer than 5 elements inside the cut-off radius)");
  return c.schedule;
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned threads = std::max(1u, std::min<unsigned>(worker_threads(), unsigned(count)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

nlohmann::json to_json_array(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v(i)));
  return a;
}

nlohmann::json derived_json(const Experiment& ex) {
  nlohmann::json d;
  if (ex.form_bound()) {
    d["a"] = ex.form_bound()->a;
    d["b"] = ex.form_bound()->b;
    d["alpha_max"] = number_or_null(ex.form_bound()->alpha_max);
    nlohmann::json trade = nlohmann::json::array();
    for (const auto& [b, a] : ex.form_bound()->trade_off) trade.push_back({{"b", b}, {"a", a}});
    d["trade_off"] = trade;
  }
  d["alpha"] = ex.alpha();
  d["z"] = ex.z();
  d["uniform_lower_bound"] = ex.uniform_lower_bound();
  d["reference_lower_bound"] = ex.reference().lower_bound_estimate();
  d["schedule"] = ex.schedule();
  d["min_spacing"] = ex.mesh().min_spacing();
  d["max_resolved_level"] = number_or_null(schrodinger::max_resolved_level(ex.mesh(), ex.sequence().base));
  return d;
}

void fill_eigs(ReportRow& row, const Vector& values) {
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, values.size()); ++i) row.eig[std::size_t(i)] = values(i);
}

nlohmann::json refinement_study(const Experiment& ex) {
  nlohmann::json out = nlohmann::json::array();
  const int k = ex.config().k_per_side;
  for (int divisor : {4, 2, 1}) {
    const int kk = k / divisor;
    if (kk < 2) continue;
    ExperimentConfig c = ex.config();
    c.k_per_side = kk;
    c.alpha = ex.alpha();
    c.z = ex.z();
    c.refinement = false;
    const Experiment coarse(c);
    const Resolvent r(coarse.reference(), coarse.z());
    const Vector f = schrodinger::interpolate(coarse.mesh(), bump, 0.0, 0.0);
    const auto& amb = *coarse.reference().form().ambient();
    out.push_back({{"k_per_side", kk},
                   {"reference_lowest_eigenvalue", coarse.reference().lower_bound_estimate()},
                   {"bump_resolvent_quadratic", mass_inner(amb, r.apply(f), f)}});
  }
  return out;
}

}  // namespace

std::vector<ReportRow> ConvergenceReport::series(const std::string& spec, const std::string& vector_id) const {
  std::vector<ReportRow> out;
  for (const auto& r : rows)
    if (r.spec == spec && (vector_id.empty() || r.vector_id == vector_id)) out.push_back(r);
  return out;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("KREINLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return unsigned(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> default_schedule(const schrodinger::Mesh& mesh, const schrodinger::RegularizingSequence& seq) {
  const double resolved = schrodinger::max_resolved_level(mesh, seq.base);
  std::vector<double> s;
  for (double n = 10.0; n <= 1e6 * (1 + 1e-12); n *= 10.0)
    if (n <= resolved || s.empty()) s.push_back(n);
  return s;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("fit", "need at least two points");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.correlation = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  return f;
}

// ---------------------------------------------------------------------------

Experiment::Experiment(ExperimentConfig config)
    : config_(validated(std::move(config))),
      fem_(schrodinger::assemble_stiffness_mass(
          schrodinger::build_mesh(config_.half_length, config_.k_per_side, config_.grading_exponent))),
      deficiency_(schrodinger::deficiency_basis(fem_.mesh, config_.eta)),
      sequence_(make_sequence(config_)) {
  const auto& potential = sequence_.base;
  const bool needs_bound = !potential.zero && (!config_.alpha || *config_.alpha > 0.0);
  if (needs_bound) {
    bound_ = schrodinger::estimate_form_bound(fem_.mesh, potential);
    const double a = bound_->a;
    if (potential.beta >= 2.0 && !(a < 1.0))
      throw ValidationError("potential.kappa", "the β = 2 form sum needs a < 1 (Hardy regime κ > 1); estimated a = " +
                                                   fmt(a));
    alpha_ = config_.alpha ? *config_.alpha : config_.alpha_fraction / a;
    if (!(alpha_ < bound_->alpha_max))
      throw ValidationError("experiment.alpha", "coupling " + fmt(alpha_) + " violates α < 1/a (a = " + fmt(a) +
                                                    ", 1/a = " + fmt(bound_->alpha_max) + ")");
    b_ = bound_->b;
  } else {
    alpha_ = potential.zero ? 0.0 : config_.alpha.value_or(0.0);
    b_ = 0.0;
  }
  const double bound = config_.eta - alpha_ * b_;
  z_ = config_.z ? *config_.z : bound - 2.0;
  if (!(z_ < bound - config_.margin))
    throw ValidationError("experiment.z", "shift " + fmt(z_) + " must lie below η − αb − margin = " +
                                               fmt(bound - config_.margin));

  schedule_ = resolve_schedule(config_, fem_.mesh, sequence_, warnings_);

  for (const auto& name : kSpecOrder) {
    if (name == "friedrichs")
      bases_.emplace_back(name, friedrichs_operator(fem_.friedrichs));
    else
      bases_.emplace_back(name, assemble_extension(fem_.friedrichs, deficiency_, spec(name)));
  }
  if (alpha_ > 0.0) {
    const SparseMatrix w_full = schrodinger::potential_form(fem_.mesh, sequence_, schrodinger::kFullPotential, false,
                                                            /*acknowledge_hardy=*/true);
    reference_ = perturb_form(base("friedrichs"), w_full, alpha_);
  } else {
    reference_ = base("friedrichs");
  }

  for (int i = 0; i < config_.random_vectors; ++i)
    vectors_.emplace_back("random" + std::to_string(i),
                          Vector(linalg::gaussian_matrix(fem_.mesh.ambient_dim(), 1, vector_seed(config_.seed, i))));
  vectors_.emplace_back("bump", schrodinger::interpolate(fem_.mesh, bump, 0.0, 0.0));
  vectors_.emplace_back("trace", Vector(deficiency_.vectors.col(0) + deficiency_.vectors.col(1)));
}

ExtensionSpec Experiment::spec(const std::string& name) const {
  if (name == "friedrichs") return ExtensionSpec::friedrichs();
  if (name == "krein") return ExtensionSpec::krein(config_.eta);
  if (name != "general") throw ValidationError("spec", "unknown extension '" + name + "'");
  DenseMatrix subspace;
  const std::string& d = config_.general_directions;
  if (d == "both") {
    subspace = DenseMatrix::Identity(2, 2);
  } else if (d == "symmetric") {
    subspace = DenseMatrix::Constant(2, 1, 1.0);
  } else {
    subspace = DenseMatrix::Zero(2, 1);
    subspace(d == "plus" ? 1 : 0, 0) = 1.0;
  }
  const DenseMatrix q = config_.general_q * DenseMatrix::Identity(subspace.cols(), subspace.cols());
  return ExtensionSpec::general(config_.eta, subspace, q);
}

const AssembledOperator& Experiment::base(const std::string& name) const {
  for (const auto& [n, op] : bases_)
    if (n == name) return op;
  throw ValidationError("spec", "unknown extension '" + name + "'");
}

SparseMatrix Experiment::cutoff_form(double n) const {
  return schrodinger::potential_form(fem_.mesh, sequence_, n, true);
}

AssembledOperator Experiment::sequence_operator(const std::string& name, const SparseMatrix& cutoff_ambient) const {
  const AssembledOperator& op = base(name);
  if (alpha_ == 0.0) return op;
  return perturb_form(op, project_to_basis(op, cutoff_ambient), alpha_);
}

AssembledOperator Experiment::sequence_operator(const std::string& name, double n) const {
  return sequence_operator(name, cutoff_form(n));
}

ShiftPolicy Experiment::policy(const std::string& name) const {
  return name == "friedrichs" ? ShiftPolicy::require_definite : ShiftPolicy::allow_indefinite;
}

// ---------------------------------------------------------------------------

OrderingCheck resolvent_ordering(const Experiment& ex, double n) {
  const SparseMatrix w = ex.cutoff_form(n);
  const AssembledOperator k = ex.sequence_operator("krein", w);
  const AssembledOperator g = ex.sequence_operator("general", w);
  const AssembledOperator f = ex.sequence_operator("friedrichs", w);
  OrderingCheck out;
  out.n = n;
  out.lambda = std::min({k.lower_bound_estimate(), g.lower_bound_estimate(), f.lower_bound_estimate()}) - 1.0;
  const Resolvent rk(k, out.lambda), rg(g, out.lambda), rf(f, out.lambda);
  out.krein_minus_general = resolvent_difference_range(rk, rg).min;
  out.general_minus_friedrichs = resolvent_difference_range(rg, rf).min;
  out.krein_minus_friedrichs = resolvent_difference_range(rk, rf).min;
  return out;
}

ConvergenceReport run_convergence(const ExperimentConfig& config) {
  const Experiment ex(config);
  const auto& cfg = ex.config();
  ConvergenceReport report;
  report.kind = "convergence";
  report.config = cfg;
  report.warnings = ex.warnings();

  const Resolvent reference(ex.reference(), ex.z(), ShiftPolicy::require_definite);
  const AmbientSpace& ambient = *ex.fem().ambient;
  const auto& vectors = ex.test_vectors();
  std::vector<Vector> reference_u;
  std::vector<double> f_norms;
  for (const auto& [id, f] : vectors) {
    reference_u.push_back(reference.apply(f));
    f_norms.push_back(mass_norm(ambient, f));
  }
  const bool all_specs = cfg.specs.size() == kSpecOrder.size();
  const int k = std::max(3, cfg.eigen_k);

  struct PointResult {
    std::vector<ReportRow> rows;
    nlohmann::json operators = nlohmann::json::array();
    nlohmann::json ordering;
  };
  std::vector<PointResult> points(ex.schedule().size());
  parallel_for(points.size(), [&](std::size_t i) {
    const double n = ex.schedule()[i];
    const SparseMatrix w = ex.cutoff_form(n);
    const Vector h_minus = ex.deficiency().vectors.col(0), h_plus = ex.deficiency().vectors.col(1);
    const double adm_plus = h_plus.dot(w * h_plus), adm_minus = h_minus.dot(w * h_minus);
    PointResult& out = points[i];
    for (const auto& name : cfg.specs) {
      const AssembledOperator h = ex.sequence_operator(name, w);
      const Resolvent r(h, ex.z(), ex.policy(name));
      const auto eig = lowest_eigenpairs(h, k);
      const double norm = resolvent_diff_norm(r, reference, cfg.norm_iterations, cfg.seed);
      for (std::size_t v = 0; v < vectors.size(); ++v) {
        ReportRow row;
        row.n = n;
        row.spec = name;
        row.vector_id = vectors[v].first;
        row.sre_error = mass_norm(ambient, Vector(r.apply(vectors[v].second) - reference_u[v])) / f_norms[v];
        row.norm_resolvent_est = norm;
        row.admissibility_plus = adm_plus;
        row.admissibility_minus = adm_minus;
        fill_eigs(row, eig.values);
        out.rows.push_back(std::move(row));
      }
      out.operators.push_back({{"n", n},
                               {"spec", name},
                               {"lower_bound", h.lower_bound_estimate()},
                               {"eigenvalues_below_shift", r.eigenvalues_below_shift()},
                               {"eigenvalues", to_json_array(eig.values)},
                               {"max_eigen_residual", eig.residuals.maxCoeff()}});
    }
    if (all_specs && ex.alpha() >= 0.0) {
      const OrderingCheck o = resolvent_ordering(ex, n);
      out.ordering = {{"n", n},
                      {"lambda", o.lambda},
                      {"krein_minus_general", o.krein_minus_general},
                      {"general_minus_friedrichs", o.general_minus_friedrichs},
                      {"krein_minus_friedrichs", o.krein_minus_friedrichs}};
    }
  });

  nlohmann::json operators = nlohmann::json::array(), ordering = nlohmann::json::array();
  for (auto& p : points) {
    for (auto& r : p.rows) report.rows.push_back(std::move(r));
    for (auto& o : p.operators) operators.push_back(std::move(o));
    if (!p.ordering.is_null()) ordering.push_back(std::move(p.ordering));
  }
  report.metadata["derived"] = derived_json(ex);
  report.metadata["operators"] = operators;
  if (!ordering.empty()) report.metadata["ordering"] = ordering;
  if (cfg.refinement) report.metadata["refinement"] = refinement_study(ex);
  return report;
}

ConvergenceReport run_admissibility(const ExperimentConfig& config) {
  const ExperimentConfig cfg = validated(config);
  const auto mesh = schrodinger::build_mesh(cfg.half_length, cfg.k_per_side, cfg.grading_exponent);
  const auto seq = make_sequence(cfg);
  const DeficiencyBasis deficiency = schrodinger::deficiency_basis(mesh, cfg.eta);

  ConvergenceReport report;
  report.kind = "admissibility";
  report.config = cfg;
  const std::vector<double> levels = resolve_schedule(cfg, mesh, seq, report.warnings);
  if (levels.size() < 3) throw ValidationError("experiment.schedule", "need at least 3 levels to fit a growth law");

  const auto plus = schrodinger::admissibility_curve(mesh, seq, deficiency.column(DofKind::deficiency_plus), levels);
  const auto minus = schrodinger::admissibility_curve(mesh, seq, deficiency.column(DofKind::deficiency_minus), levels);
  for (const auto& w : plus.warnings) report.warnings.push_back(w);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    ReportRow row;
    row.n = levels[i];
    row.spec = "deficiency";
    row.vector_id = "h";
    row.admissibility_plus = plus.points[i].second;
    row.admissibility_minus = minus.points[i].second;
    report.rows.push_back(std::move(row));
  }

  const bool log_law = !seq.base.zero && seq.base.beta <= 1.0;
  const double expected = seq.base.zero ? 0.0
                          : log_law     ? seq.base.coefficient() / seq.base.beta
                                        : (seq.base.beta - 1.0) / seq.base.beta;
  auto fit_curve = [&](const schrodinger::AdmissibilityCurve& curve) {
    std::vector<double> x, y;
    bool positive = true;
    for (const auto& [n, v] : curve.points) {
      x.push_back(std::log(n));
      y.push_back(log_law ? v : std::log(v));
      positive = positive && v > 0.0;
    }
    nlohmann::json j;
    j["law"] = log_law ? "log" : "power";
    j["expected_slope"] = expected;
    j["reliable"] = curve.reliable;
    if (!positive) {
      j["slope"] = nullptr;
      j["correlation"] = nullptr;
      j["verdict"] = "not admissible";
      return j;
    }
    const LineFit fit = fit_line(x, y);
    // The growth law has to persist over the last interval of the schedule;
    // a saturating (bounded) curve fails this.
    const std::size_t m = y.size();
    const double last_rate = (y[m - 1] - y[m - 2]) / (x[m - 1] - x[m - 2]);
    const bool divergent = fit.slope > 0.0 && last_rate >= 0.5 * fit.slope;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["correlation"] = fit.correlation;
    j["last_interval_rate"] = last_rate;
    j["verdict"] = divergent ? "admissible-divergent" : "not admissible";
    return j;
  };
  const auto fit_plus = fit_curve(plus), fit_minus = fit_curve(minus);
  const bool both = fit_plus["verdict"] == "admissible-divergent" && fit_minus["verdict"] == "admissible-divergent";
  report.metadata["fit"] = {{"plus", fit_plus}, {"minus", fit_minus}};
  report.metadata["verdict"] = both ? "admissible-divergent" : "not admissible";
  report.metadata["reliable"] = plus.reliable && minus.reliable;
  report.metadata["schedule"] = levels;
  return report;
}

ConvergenceReport run_spectrum_tracking(const ExperimentConfig& config, int k) {
  if (k < 1 || k > 5) throw ValidationError("k", "must lie in [1, 5]");
  const Experiment ex(config);
  const auto& cfg = ex.config();
  ConvergenceReport report;
  report.kind = "spectrum";
  report.config = cfg;
  report.warnings = ex.warnings();

  std::vector<std::string> names = cfg.specs;
  if (std::find(names.begin(), names.end(), "friedrichs") == names.end()) names.insert(names.begin(), "friedrichs");

  struct PointResult {
    std::vector<std::pair<std::string, Vector>> values;
  };
  std::vector<PointResult> points(ex.schedule().size());
  parallel_for(points.size(), [&](std::size_t i) {
    const SparseMatrix w = ex.cutoff_form(ex.schedule()[i]);
    for (const auto& name : names)
      points[i].values.emplace_back(name, lowest_eigenpairs(ex.sequence_operator(name, w), k).values);
  });

  const Eigen::Index d = ex.deficiency().dim();
  nlohmann::json spectra = nlohmann::json::array(), ordering = nlohmann::json::array(), gaps = nlohmann::json::array();
  bool ordered = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double n = ex.schedule()[i];
    const Vector* friedrichs = nullptr;
    for (const auto& [name, values] : points[i].values)
      if (name == "friedrichs") friedrichs = &values;
    for (const auto& [name, values] : points[i].values) {
      ReportRow row;
      row.n = n;
      row.spec = name;
      row.vector_id = "-";
      fill_eigs(row, values);
      report.rows.push_back(row);
      spectra.push_back({{"n", n}, {"spec", name}, {"eigenvalues", to_json_array(values)}});
      if (name == "friedrichs") continue;
      double worst = std::numeric_limits<double>::infinity();
      for (Eigen::Index l = 0; l < values.size(); ++l) worst = std::min(worst, (*friedrichs)(l) - values(l));
      const double tol = 1e-9 * std::max(1.0, friedrichs->cwiseAbs().maxCoeff());
      ordered = ordered && worst >= -tol;
      ordering.push_back({{"n", n}, {"spec", name}, {"min_friedrichs_minus_spec", worst}});
      if (name == "krein" && values.size() > d)
        gaps.push_back({{"n", n},
                        {"escaping", to_json_array(values.head(d))},
                        {"gap", (*friedrichs)(0) - values(d)}});
    }
  }
  report.metadata["derived"] = derived_json(ex);
  report.metadata["spectra"] = spectra;
  report.metadata["ordering"] = ordering;
  report.metadata["ordering_holds"] = ordered;
  if (!gaps.empty()) {
    report.metadata["krein_gap"] = gaps;
    const double first = gaps.front()["gap"].get<double>(), last = gaps.back()["gap"].get<double>();
    report.metadata["krein_gap_ratio"] = number_or_null(last / first);
  }
  const auto ref = lowest_eigenpairs(ex.reference(), k);
  report.metadata["reference_eigenvalues"] = to_json_array(ref.values);
  return report;
}

}  // namespace kreinlab::lab
