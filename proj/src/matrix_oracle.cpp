#include "kreinlab/matrix_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <json.hpp>

#include "kreinlab/eigensolver.hpp"
#include "kreinlab/errors.hpp"

namespace kreinlab::oracle {

namespace {

constexpr double kMaxCondition = 1e8;
constexpr int kMaxRedraws = 64;

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a simple combination
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DenseMatrix symmetrize(const DenseMatrix& a) { return 0.5 * (a + a.transpose()); }

double condition_number(const DenseMatrix& a) {
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smallest = s(s.size() - 1);
  return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

DenseMatrix deficiency_vectors(const DenseMatrix& a, const DenseMatrix& complement, double eta) {
  const DenseMatrix shifted = a - eta * DenseMatrix::Identity(a.rows(), a.cols());
  DenseMatrix h = shifted.ldlt().solve(complement);
  for (Eigen::Index j = 0; j < h.cols(); ++j) h.col(j).normalize();
  return h;
}

RandomInstance finish_instance(DenseMatrix a, const DenseMatrix& domain_basis, double eta, std::uint64_t seed) {
  const Eigen::Index n = a.rows();
  Eigen::HouseholderQR<DenseMatrix> qr(domain_basis);
  const DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, n);
  RandomInstance out;
  out.dim = int(n);
  out.codim = int(n - domain_basis.cols());
  out.seed = seed;
  out.eta = eta;
  out.a = std::move(a);
  out.domain = q.leftCols(domain_basis.cols());
  out.complement = q.rightCols(n - domain_basis.cols());
  SparseMatrix identity(n, n);
  identity.setIdentity();
  out.ambient = std::make_shared<AmbientSpace>(AmbientSpace{identity});
  return out;
}

CheckResult bounded_check(std::string name, double margin, double tol) {
  return CheckResult{std::move(name), margin, margin >= -tol};
}

CheckResult error_check(std::string name, double error, double tol) {
  return CheckResult{std::move(name), error, std::isfinite(error) && error <= tol};
}

double min_symmetric_eigenvalue(const DenseMatrix& a) { return linalg::min_eigenvalue(symmetrize(a)); }

}  // namespace

QuadraticForm RandomInstance::friedrichs_form() const {
  const Eigen::Index m = domain.cols();
  return QuadraticForm(linalg::to_sparse(symmetrize(domain.transpose() * a * domain)),
                       linalg::to_sparse(DenseMatrix::Identity(m, m)),
                       std::vector<DofKind>(std::size_t(m), DofKind::interior), linalg::to_sparse(domain), ambient);
}

DeficiencyBasis RandomInstance::deficiency_at(double at_eta) const {
  if (!std::isfinite(at_eta) || !(at_eta < 0.0)) throw ValidationError("eta", "must be finite and < 0");
  DeficiencyBasis out;
  out.eta = at_eta;
  out.vectors = deficiency_vectors(a, complement, at_eta);
  out.kinds.assign(std::size_t(codim), DofKind::deficiency);
  return out;
}

RandomInstance generate_instance(int dim, int codim, std::uint64_t seed) {
  if (dim < 2 || dim > 12) throw ValidationError("dim", "must lie in [2, 12]");
  if (codim < 1 || codim >= dim) throw ValidationError("codim", "need 1 <= codim < dim");
  for (int sub = 0; sub <= kMaxRedraws; ++sub) {
    const DenseMatrix g = linalg::gaussian_matrix(dim, dim, mix(seed, std::uint64_t(sub), 1));
    DenseMatrix a = symmetrize(g * g.transpose() / double(dim));
    const DenseMatrix frame = linalg::gaussian_matrix(dim, dim - codim, mix(seed, std::uint64_t(sub), 2));
    std::mt19937_64 rng(mix(seed, std::uint64_t(sub), 3));
    const double eta = std::uniform_real_distribution<double>(-2.0, -0.5)(rng);
    RandomInstance inst = finish_instance(std::move(a), frame, eta, seed);
    DenseMatrix basis(dim, dim);
    basis << inst.domain, deficiency_vectors(inst.a, inst.complement, eta);
    if (condition_number(basis) <= kMaxCondition && condition_number(frame) <= kMaxCondition) {
      inst.redraws = sub;
      return inst;
    }
  }
  throw NumericalError("degenerate_instance", "every redraw was ill-conditioned",
                       {{"seed", double(seed)}, {"redraws", double(kMaxRedraws)}});
}

RandomInstance make_instance(const DenseMatrix& a, const DenseMatrix& domain_basis, double eta, std::uint64_t seed) {
  if (a.rows() != a.cols() || a.rows() < 2) throw ValidationError("a", "must be square with dimension >= 2");
  if (linalg::relative_asymmetry(a) > 1e-12) throw ValidationError("a", "not symmetric");
  if (domain_basis.rows() != a.rows() || domain_basis.cols() < 1 || domain_basis.cols() >= a.rows())
    throw ValidationError("domain_basis", "need 1 <= dim D < N columns of length N");
  if (linalg::column_rank(domain_basis) != domain_basis.cols())
    throw ValidationError("domain_basis", "columns are linearly dependent");
  if (!std::isfinite(eta) || !(eta < 0.0)) throw ValidationError("eta", "must be finite and < 0");
  if (!(linalg::min_eigenvalue(a) > eta)) throw ValidationError("eta", "must lie below the spectrum of a");
  return finish_instance(symmetrize(a), domain_basis, eta, seed);
}

ExtensionSpec random_general_spec(const RandomInstance& instance, std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed, 17, 0));
  const int r = std::uniform_int_distribution<int>(1, instance.codim)(rng);
  const int q_rank = std::uniform_int_distribution<int>(0, r)(rng);
  const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 2.0)(rng));
  const DenseMatrix subspace = linalg::gaussian_matrix(instance.codim, r, mix(seed, 17, 1));
  DenseMatrix q = DenseMatrix::Zero(r, r);
  if (q_rank > 0) {
    const DenseMatrix g = linalg::gaussian_matrix(r, q_rank, mix(seed, 17, 2));
    q = symmetrize(scale * g * g.transpose());
  }
  return ExtensionSpec::general(instance.eta, subspace, q);
}

DenseMatrix dense_resolvent(const AssembledOperator& op, double lambda) {
  const DenseMatrix p = DenseMatrix(op.form().embedding());
  const DenseMatrix f = DenseMatrix(op.form().form_matrix());
  const DenseMatrix m = DenseMatrix(op.form().mass_matrix());
  const DenseMatrix ambient_mass = DenseMatrix(op.form().ambient()->mass);
  const DenseMatrix shifted = f - lambda * m;
  const DenseMatrix rhs = p.transpose() * ambient_mass;
  return p * shifted.ldlt().solve(rhs);
}

bool CorrespondenceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<CheckFailure> CorrespondenceReport::failures() const {
  std::vector<CheckFailure> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(CheckFailure{seed, spec, c.check, c.residual});
  return out;
}

CorrespondenceReport verify_correspondence(const RandomInstance& instance, const ExtensionSpec& spec,
                                           double tolerance) {
  CorrespondenceReport report;
  report.seed = instance.seed;
  report.spec = spec.tag();

  const QuadraticForm friedrichs = instance.friedrichs_form();
  const DeficiencyBasis deficiency = instance.deficiency();
  const AssembledOperator op = assemble_extension(friedrichs, deficiency, spec);
  const AssembledOperator friedrichs_op = friedrichs_operator(friedrichs);
  const AssembledOperator krein_op = assemble_extension(friedrichs, deficiency, ExtensionSpec::krein(instance.eta));
  const Eigen::Index n_int = op.interior_dim();

  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      report.checks.push_back(fn());
    } catch (const NumericalError& e) {
      report.checks.push_back(CheckResult{name + ":" + e.kind(), std::numeric_limits<double>::quiet_NaN(), false});
    } catch (const ValidationError& e) {
      report.checks.push_back(CheckResult{name + ":" + e.field(), std::numeric_limits<double>::quiet_NaN(), false});
    }
  };

  guarded("extension_property", [&] {
    const DenseMatrix p = DenseMatrix(op.form().embedding());
    const DenseMatrix expected = instance.domain.transpose() * instance.a * p;
    const DenseMatrix actual = DenseMatrix(op.form().form_matrix()).topRows(n_int);
    const double scale = std::max(expected.cwiseAbs().maxCoeff(), 1e-300);
    return error_check("extension_property", (expected - actual).cwiseAbs().maxCoeff() / scale, tolerance);
  });

  guarded("lower_bound", [&] {
    const auto pairs = eigen::dense_eigenpairs(DenseMatrix(op.form().form_matrix()),
                                               DenseMatrix(op.form().mass_matrix()));
    return bounded_check("lower_bound", pairs.values(0) - instance.eta, tolerance);
  });

  const double lambda = instance.eta - 1.0;
  const DenseMatrix r_spec = dense_resolvent(op, lambda);
  guarded("friedrichs_maximal", [&] {
    return bounded_check("friedrichs_maximal",
                         min_symmetric_eigenvalue(r_spec - dense_resolvent(friedrichs_op, lambda)), tolerance);
  });
  guarded("krein_minimal", [&] {
    return bounded_check("krein_minimal", min_symmetric_eigenvalue(dense_resolvent(krein_op, lambda) - r_spec),
                         tolerance);
  });

  guarded("krein_eigenvalue", [&] {
    const auto pairs = eigen::dense_eigenpairs(DenseMatrix(krein_op.form().form_matrix()),
                                               DenseMatrix(krein_op.form().mass_matrix()));
    std::vector<double> distance(std::size_t(pairs.values.size()));
    for (Eigen::Index i = 0; i < pairs.values.size(); ++i)
      distance[std::size_t(i)] = std::abs(pairs.values(i) - instance.eta);
    std::sort(distance.begin(), distance.end());
    return error_check("krein_eigenvalue", distance[std::size_t(instance.codim) - 1], tolerance);
  });

  const double eta_prime = 2.0 * instance.eta;
  guarded("reparameterization", [&] {
    const DeficiencyBasis at = instance.deficiency_at(eta_prime);
    const ExtensionSpec moved = reparameterize_form(op, friedrichs, at, eta_prime);
    const Eigen::Index before = spec.subspace(deficiency.dim()).cols();
    const Eigen::Index after = moved.subspace(at.dim()).cols();
    report.checks.push_back(error_check("reparameterization_dimension", double(std::abs(after - before)), 0.0));
    if (moved.is_friedrichs()) return error_check("reparameterization_round_trip", 0.0, tolerance);
    const AssembledOperator again = assemble_extension(friedrichs, at, moved);
    return error_check("reparameterization_round_trip", round_trip_error(op, again), tolerance);
  });
  return report;
}

SuiteResult run_suite(int seeds, int dim, int codim, int general_specs, unsigned threads, std::uint64_t first_seed) {
  if (seeds < 1) throw ValidationError("seeds", "must be >= 1");
  if (general_specs < 0) throw ValidationError("general_specs", "must be >= 0");
  // Validate dimensions up front so bad input fails before any worker starts.
  (void)generate_instance(dim, codim, first_seed);

  struct PerSeed {
    int verifications = 0;
    int redraws = 0;
    std::vector<CheckFailure> failures;
  };
  std::vector<PerSeed> results(static_cast<std::size_t>(seeds));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < seeds; i = next++) {
      const std::uint64_t seed = first_seed + std::uint64_t(i);
      const RandomInstance inst = generate_instance(dim, codim, seed);
      std::vector<ExtensionSpec> specs{ExtensionSpec::friedrichs(), ExtensionSpec::krein(inst.eta)};
      for (int j = 0; j < general_specs; ++j) specs.push_back(random_general_spec(inst, mix(seed, 99, std::uint64_t(j))));
      PerSeed& out = results[std::size_t(i)];
      out.redraws = inst.redraws;
      for (const auto& spec : specs) {
        const auto report = verify_correspondence(inst, spec);
        ++out.verifications;
        for (auto& f : report.failures()) out.failures.push_back(std::move(f));
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min(threads, unsigned(seeds)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SuiteResult out;
  out.instances = seeds;
  for (auto& r : results) {
    out.verifications += r.verifications;
    out.redraws += r.redraws;
    for (auto& f : r.failures) out.failures.push_back(std::move(f));
  }
  return out;
}

std::string to_json_lines(const std::vector<CheckFailure>& failures) {
  std::string out;
  for (const auto& f : failures) {
    nlohmann::json j;
    j["seed"] = f.seed;
    j["spec"] = f.spec;
    j["check"] = f.check;
    if (std::isfinite(f.residual))
      j["residual"] = f.residual;
    else
      j["residual"] = nullptr;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace kreinlab::oracle
