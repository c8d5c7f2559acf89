#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kreinlab/errors.hpp"
#include "kreinlab/convergence_lab.hpp"
#include "kreinlab/report_io.hpp"

using namespace kreinlab;
using namespace kreinlab::lab;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.k_per_side = 200;
  c.schedule = {10.0, 100.0, 1000.0};
  c.norm_iterations = 40;
  c.random_vectors = 2;
  return c;
}

ExperimentConfig control_config() {
  ExperimentConfig c = small_config();
  c.alpha = 0.0;
  return c;
}

}  // namespace

TEST_CASE("zero coupling: the Friedrichs sequence is the reference itself") {
  const auto report = run_convergence(control_config());
  const auto rows = report.series("friedrichs");
  REQUIRE(rows.size() == 3 * 4);
  for (const auto& r : rows) {
    CHECK(r.sre_error == 0.0);
    CHECK(r.norm_resolvent_est == 0.0);
  }
}

TEST_CASE("zero coupling: the Krein sequence stays away from the reference") {
  const auto report = run_convergence(control_config());
  for (const std::string id : {"random0", "bump", "trace"}) {
    const auto rows = report.series("krein", id);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) CHECK(std::abs(r.sre_error - rows.front().sre_error) < 1e-10);
  }
  CHECK(report.series("krein", "trace").front().sre_error >= 1e-3);
  CHECK(report.series("krein", "random0").front().norm_resolvent_est >= 1e-3);
}

TEST_CASE("coupled run: ordering, Friedrichs monotonicity and row layout") {
  const auto report = run_convergence(small_config());
  CHECK(report.kind == "convergence");
  for (std::size_t i = 1; i < report.rows.size(); ++i) CHECK(report.rows[i - 1].n <= report.rows[i].n);
  for (const std::string id : {"random0", "random1", "bump", "trace"}) {
    const auto f = report.series("friedrichs", id), k = report.series("krein", id), g = report.series("general", id);
    REQUIRE(f.size() == 3);
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(f[i].sre_error <= k[i].sre_error);
      if (i > 0) CHECK(f[i].sre_error <= f[i - 1].sre_error + 1e-12);
      CHECK(k[i].admissibility_plus > 0.0);
    }
    for (std::size_t i = 1; i < k.size(); ++i) CHECK(k[i].sre_error < k[i - 1].sre_error);
  }
  const auto& ordering = report.metadata.at("ordering");
  REQUIRE(ordering.size() == 3);
  for (const auto& o : ordering) {
    CHECK(o.at("krein_minus_general").get<double>() >= -1e-9);
    CHECK(o.at("general_minus_friedrichs").get<double>() >= -1e-9);
    CHECK(o.at("krein_minus_friedrichs").get<double>() >= -1e-9);
  }
  const auto& derived = report.metadata.at("derived");
  CHECK(derived.at("z").get<double>() == doctest::Approx(derived.at("uniform_lower_bound").get<double>() - 2.0));
}

TEST_CASE("resolvent ordering on explicit test vectors") {
  const Experiment ex(small_config());
  const OrderingCheck o = resolvent_ordering(ex, 100.0);
  const SparseMatrix w = ex.cutoff_form(100.0);
  const Resolvent rk(ex.sequence_operator("krein", w), o.lambda), rg(ex.sequence_operator("general", w), o.lambda),
      rf(ex.sequence_operator("friedrichs", w), o.lambda);
  const AmbientSpace& amb = *ex.fem().ambient;
  for (const auto& [id, f] : ex.test_vectors()) {
    const double scale = mass_inner(amb, f, f);
    CAPTURE(id);
    CHECK(mass_inner(amb, rk.apply(f), f) >= mass_inner(amb, rg.apply(f), f) - 1e-9 * scale);
    CHECK(mass_inner(amb, rg.apply(f), f) >= mass_inner(amb, rf.apply(f), f) - 1e-9 * scale);
  }
}

TEST_CASE("cut-off forms increase in the Loewner order") {
  const Experiment ex(small_config());
  const DenseMatrix w1 = DenseMatrix(ex.cutoff_form(10.0)), w2 = DenseMatrix(ex.cutoff_form(100.0));
  const DenseMatrix diff = w2 - w1;
  CHECK(linalg::min_eigenvalue(diff) >= -1e-9 * std::max(1.0, diff.cwiseAbs().maxCoeff()));
}

TEST_CASE("admissibility: growth law, monotone values and capped potential") {
  ExperimentConfig c = small_config();
  c.k_per_side = 2000;
  c.schedule = {100.0, 1000.0, 10000.0, 100000.0, 1000000.0};
  const auto report = run_admissibility(c);
  CHECK(report.metadata.at("verdict") == "admissible-divergent");
  CHECK(report.metadata.at("fit").at("plus").at("slope").get<double>() == doctest::Approx(1.0 / 3.0).epsilon(0.15));
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].admissibility_plus >= report.rows[i - 1].admissibility_plus);
    CHECK(report.rows[i].admissibility_minus >= report.rows[i - 1].admissibility_minus);
  }
  c.cap = 10.0;
  const auto capped = run_admissibility(c);
  CHECK(capped.metadata.at("verdict") == "not admissible");
  CHECK(capped.rows.back().admissibility_plus == doctest::Approx(capped.rows[1].admissibility_plus).epsilon(1e-12));
  c.cap.reset();
  c.schedule = {10.0, 100.0};
  CHECK_THROWS_AS(run_admissibility(c), ValidationError);
}

TEST_CASE("spectrum tracking at zero coupling") {
  ExperimentConfig c = control_config();
  c.k_per_side = 2000;
  c.schedule = {10.0, 100.0};
  const auto report = run_spectrum_tracking(c, 3);
  for (const auto& r : report.rows) {
    if (r.spec == "krein") {
      CHECK(r.eig[0] == doctest::Approx(-1.0).epsilon(1e-6));
      CHECK(r.eig[1] == doctest::Approx(-1.0).epsilon(1e-6));
    }
    if (r.spec == "friedrichs")
      CHECK(r.eig[0] == doctest::Approx(std::numbers::pi * std::numbers::pi / 100.0).epsilon(5e-3));
  }
  CHECK(report.metadata.at("ordering_holds").get<bool>());
  CHECK_THROWS_AS(run_spectrum_tracking(c, 6), ValidationError);
}

TEST_CASE("spectrum tracking keeps every extension below the Friedrichs sequence") {
  ExperimentConfig c = small_config();
  const auto report = run_spectrum_tracking(c, 4);
  CHECK(report.metadata.at("ordering_holds").get<bool>());
  for (const auto& o : report.metadata.at("ordering")) CHECK(o.at("min_friedrichs_minus_spec").get<double>() >= -1e-9);
  CHECK(report.metadata.contains("krein_gap"));
}

TEST_CASE("configuration validation") {
  ExperimentConfig c = small_config();
  c.alpha = 9.9;
  try {
    Experiment ex(c);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("α < 1/a") != std::string::npos);
  }
  c = small_config();
  c.z = -1.5;
  CHECK_THROWS_AS(Experiment{c}, ValidationError);
  c = small_config();
  c.eta = 0.5;
  CHECK_THROWS_AS(Experiment{c}, ValidationError);
  c = small_config();
  c.schedule = {100.0, 10.0};
  CHECK_THROWS_AS(Experiment{c}, ValidationError);
  c = small_config();
  c.specs = {"none"};
  CHECK_THROWS_AS(Experiment{c}, ValidationError);
  c = small_config();
  c.general_q = -1.0;
  CHECK_THROWS_AS(Experiment{c}, ValidationError);
}

TEST_CASE("default schedule and mesh resolution warnings") {
  ExperimentConfig c = small_config();
  c.schedule.clear();
  const Experiment ex(c);
  const auto& s = ex.schedule();
  REQUIRE(!s.empty());
  CHECK(s.front() == 10.0);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(10.0 * s[i - 1]));
  CHECK(s.back() <= 1e6 * (1 + 1e-12));
  c.k_per_side = 20;
  c.schedule = {10.0, 1e6};
  const Experiment coarse(c);
  CHECK(!coarse.warnings().empty());
}

TEST_CASE("line fit") {
  const auto fit = fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.correlation == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1.0}, {1.0}), ValidationError);
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
  ExperimentConfig c = small_config();
  c.schedule = {10.0, 100.0};
  const std::string first = report::to_csv(run_convergence(c));
  setenv("KREINLAB_THREADS", "1", 1);
  CHECK(worker_threads() == 1);
  const std::string serial = report::to_csv(run_convergence(c));
  setenv("KREINLAB_THREADS", "4", 1);
  CHECK(worker_threads() == 4);
  CHECK(first == serial);
  CHECK(first.rfind("n,spec,vector_id,sre_error,norm_resolvent_est,admissibility_plus,admissibility_minus,eig1,eig2,eig3\n", 0) == 0);
}

TEST_CASE("flagship spectrum: escaping pair diverges, the next Krein level closes in on Friedrichs") {
  ExperimentConfig c;
  c.schedule = {10.0, 100.0, 1000.0, 10000.0};
  const auto report = run_spectrum_tracking(c, 3);
  CHECK(report.metadata.at("ordering_holds").get<bool>());
  const auto& gaps = report.metadata.at("krein_gap");
  REQUIRE(gaps.size() == 4);
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const auto& prev = gaps[i - 1];
    const auto& cur = gaps[i];
    CHECK(cur.at("escaping")[0].get<double>() < prev.at("escaping")[0].get<double>());
    CHECK(std::abs(cur.at("gap").get<double>()) < std::abs(prev.at("gap").get<double>()));
  }
  // one escaping eigenvalue per half-line: the pair is degenerate
  for (const auto& g : gaps)
    CHECK(g.at("escaping")[0].get<double>() == doctest::Approx(g.at("escaping")[1].get<double>()).epsilon(1e-10));
  // regression: |gap(1e4)| / |gap(10)| on this schedule
  CHECK(report.metadata.at("krein_gap_ratio").get<double>() == doctest::Approx(0.4239992330136553).epsilon(1e-6));
}
