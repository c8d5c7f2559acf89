// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [flagship.cfg]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <string>

#include "kreinlab/config.hpp"
#include "kreinlab/convergence_lab.hpp"
#include "kreinlab/eigensolver.hpp"
#include "kreinlab/matrix_oracle.hpp"
#include "kreinlab/schrodinger.hpp"
#include "kreinlab/spectral.hpp"

using namespace kreinlab;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

ExperimentConfig flagship_config(const std::string& path) {
  ExperimentConfig c = path.empty() ? ExperimentConfig{} : load_config(path);
  if (path.empty()) {
    c.schedule = {10.0, 100.0, 1000.0, 10000.0};
    c.refinement = false;
  }
  return c;
}

Verdict oracle_suite() {
  const auto result = oracle::run_suite(100, 8, 2, 3, lab::worker_threads());
  std::string detail = std::to_string(result.verifications) + " verifications, " +
                       std::to_string(result.failures.size()) + " failures";
  if (!result.failures.empty())
    detail += " (first: seed " + std::to_string(result.failures.front().seed) + " " + result.failures.front().spec +
              " " + result.failures.front().check + " residual " + num(result.failures.front().residual) + ")";
  return {result.failures.empty(), detail};
}

Verdict dirichlet_sanity() {
  const auto fem = schrodinger::assemble_stiffness_mass(schrodinger::build_mesh(10.0, 2000, 3.0));
  const auto pairs = lowest_eigenpairs(friedrichs_operator(fem.friedrichs), 4);
  // the Dirichlet condition at 0 decouples the half-lines: every level is double
  const double l1 = std::numbers::pi * std::numbers::pi / 100.0, l2 = 4.0 * l1;
  const double e1 = std::max(std::abs(pairs.values[0] - l1), std::abs(pairs.values[1] - l1)) / l1;
  const double e2 = std::max(std::abs(pairs.values[2] - l2), std::abs(pairs.values[3] - l2)) / l2;
  return {e1 <= 5e-3 && e2 <= 1e-2, "relative errors " + num(e1) + " (<= 0.005), " + num(e2) + " (<= 0.01)"};
}

Verdict hardy_regime() {
  const auto mesh = schrodinger::build_mesh(10.0, 2000, 3.0);
  const double a_strong = schrodinger::estimate_form_bound(mesh, schrodinger::SingularPotential::power_law(2.0, 2.0)).a;
  const double a_weak = schrodinger::estimate_form_bound(mesh, schrodinger::SingularPotential::power_law(0.9, 2.0)).a;
  return {a_strong >= 0.45 && a_strong <= 0.55 && a_weak > 1.0,
          "a(kappa=2) = " + num(a_strong) + " in [0.45, 0.55], a(kappa=0.9) = " + num(a_weak) + " > 1"};
}

Verdict admissibility_divergence() {
  ExperimentConfig c;
  c.k_per_side = 2000;
  c.grading_exponent = 3.0;
  c.schedule = {1e2, 1e3, 1e4, 1e5, 1e6};
  c.beta = 1.5;
  const auto power = lab::run_admissibility(c);
  c.beta = 1.0;
  const auto log = lab::run_admissibility(c);
  bool pass = true;
  std::string detail;
  for (const char* side : {"plus", "minus"}) {
    const double slope = power.metadata["fit"][side]["slope"].get<double>();
    const double corr = log.metadata["fit"][side]["correlation"].get<double>();
    pass = pass && std::abs(slope - 1.0 / 3.0) <= 0.05 && corr >= 0.999;
    detail += std::string(detail.empty() ? "" : ", ") + side + ": slope " + num(slope) + ", log corr " + num(corr);
  }
  return {pass, detail};
}

const char* kVectorIds[] = {"random0", "random1", "random2", "bump", "trace"};

Verdict flagship_convergence(const lab::ConvergenceReport& report) {
  bool pass = true;
  double worst_ratio = 0.0;
  for (const char* id : kVectorIds) {
    const auto krein = report.series("krein", id), friedrichs = report.series("friedrichs", id);
    if (krein.empty()) continue;
    for (std::size_t i = 0; i < krein.size(); ++i) {
      if (i > 0) pass = pass && krein[i].sre_error < krein[i - 1].sre_error;
      pass = pass && friedrichs[i].sre_error <= krein[i].sre_error;
    }
    const double ratio = krein.back().sre_error / krein.front().sre_error;
    worst_ratio = std::max(worst_ratio, ratio);
    pass = pass && ratio <= 0.2;
  }
  const auto random = report.series("krein", "random0");
  return {pass, "Krein error " + num(random.front().sre_error) + " -> " + num(random.back().sre_error) +
                    " (random0), worst final/initial " + num(worst_ratio) + " (<= 0.2)"};
}

Verdict necessity_control(const std::string& path) {
  ExperimentConfig c = flagship_config(path);
  c.alpha = 0.0;
  c.z.reset();
  c.refinement = false;
  c.specs = {"friedrichs", "krein"};
  const auto report = lab::run_convergence(c);
  double variation = 0.0, smallest = std::numeric_limits<double>::infinity();
  for (const char* id : kVectorIds) {
    const auto krein = report.series("krein", id);
    for (const auto& r : krein) {
      variation = std::max(variation, std::abs(r.sre_error - krein.front().sre_error));
      smallest = std::min(smallest, r.sre_error);
    }
  }
  const bool pass = variation < 1e-10 && smallest >= 1e-3;
  return {pass, "variation " + num(variation) + " (< 1e-10), smallest error " + num(smallest) + " (>= 1e-3)"};
}

Verdict norm_convergence(const lab::ConvergenceReport& report) {
  const auto krein = report.series("krein", "random0");
  const double first = krein.front().norm_resolvent_est, last = krein.back().norm_resolvent_est;
  return {last <= 0.5 * first, "norm estimate " + num(first) + " -> " + num(last) + " (ratio " + num(last / first) +
                                   ", <= 0.5)"};
}

Verdict monotonicity(const std::string& path, const lab::ConvergenceReport& report) {
  const lab::Experiment ex(flagship_config(path));
  // smallest generalized eigenvalue of W_{n'} - W_n against the mass, via inertia at -1e-9
  double worst_pivots = 0.0;
  SparseMatrix previous = ex.cutoff_form(ex.schedule().front());
  for (std::size_t i = 1; i < ex.schedule().size(); ++i) {
    const SparseMatrix next = ex.cutoff_form(ex.schedule()[i]);
    const SparseMatrix diff = next - previous;
    const eigen::ShiftedPencil pencil(diff, ex.fem().ambient->mass, -1e-9);
    worst_pivots = std::max(worst_pivots, double(pencil.negative_pivots()) + (pencil.ok() ? 0.0 : 1.0));
    previous = next;
  }
  double worst = std::numeric_limits<double>::infinity();
  std::size_t points = 0;
  if (report.metadata.contains("ordering"))
    for (const auto& o : report.metadata["ordering"]) {
      for (const char* key : {"krein_minus_general", "general_minus_friedrichs", "krein_minus_friedrichs"})
        worst = std::min(worst, o[key].get<double>());
      ++points;
    }
  const bool pass = worst_pivots == 0.0 && points == ex.schedule().size() && worst >= -1e-9;
  return {pass, "W_n eigenvalues below -1e-9: " + num(worst_pivots) + ", smallest resolvent-difference eigenvalue " +
                    num(worst) + " over " + std::to_string(points) + " levels"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "";
  int failures = 0;
  auto report_line = [&](int id, const char* name, const std::function<Verdict()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += v.pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), seconds);
    std::fflush(stdout);
  };

  report_line(1, "oracle suite", oracle_suite);
  report_line(2, "Dirichlet eigenvalues", dirichlet_sanity);
  report_line(3, "Hardy regime form bound", hardy_regime);
  report_line(4, "admissibility divergence", admissibility_divergence);

  lab::ConvergenceReport flagship;
  std::string flagship_error;
  try {
    flagship = lab::run_convergence(flagship_config(path));
  } catch (const std::exception& e) {
    flagship_error = e.what();
  }
  auto with_flagship = [&](const std::function<Verdict()>& check) -> std::function<Verdict()> {
    return [&, check] {
      if (!flagship_error.empty()) return Verdict{false, "flagship run failed: " + flagship_error};
      return check();
    };
  };
  report_line(5, "flagship convergence", with_flagship([&] { return flagship_convergence(flagship); }));
  report_line(6, "necessity control", [&] { return necessity_control(path); });
  report_line(7, "norm-resolvent convergence", with_flagship([&] { return norm_convergence(flagship); }));
  report_line(8, "monotonicity invariants", with_flagship([&] { return monotonicity(path, flagship); }));

  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
