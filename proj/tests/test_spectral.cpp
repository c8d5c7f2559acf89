#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "kreinlab/errors.hpp"
#include "kreinlab/schrodinger.hpp"
#include "kreinlab/spectral.hpp"

using namespace kreinlab;
using namespace kreinlab::schrodinger;

namespace {

// Operator with a diagonal form over an orthonormal (identity-mass) basis.
AssembledOperator diagonal_operator(const std::vector<double>& diag) {
  const Eigen::Index n = Eigen::Index(diag.size());
  SparseMatrix f(n, n), id(n, n);
  id.setIdentity();
  for (Eigen::Index i = 0; i < n; ++i) f.insert(i, i) = diag[std::size_t(i)];
  auto ambient = std::make_shared<AmbientSpace>(AmbientSpace{id});
  QuadraticForm form(f, id, std::vector<DofKind>(std::size_t(n), DofKind::interior), id, ambient);
  return friedrichs_operator(form);
}

// Dense mass-norm of R1 - R2: largest |eigenvalue| of L^T (S1 - S2) L, R = S M, M = L L^T.
double dense_difference_norm(const AssembledOperator& a, const AssembledOperator& b, double z) {
  auto kernel = [&](const AssembledOperator& op) {
    const DenseMatrix p = DenseMatrix(op.form().embedding());
    const DenseMatrix pencil = DenseMatrix(op.form().form_matrix()) - z * DenseMatrix(op.form().mass_matrix());
    return DenseMatrix(p * pencil.ldlt().solve(p.transpose()));
  };
  const DenseMatrix l = DenseMatrix(a.form().ambient()->mass).llt().matrixL();
  const DenseMatrix s = l.transpose() * (kernel(a) - kernel(b)) * l;
  return Eigen::SelfAdjointEigenSolver<DenseMatrix>(0.5 * (s + s.transpose())).eigenvalues().cwiseAbs().maxCoeff();
}

struct Model {
  FemSystem fem;
  DeficiencyBasis def;
  AssembledOperator friedrichs;
  AssembledOperator krein;
};

Model model(int k, double g = 3.0) {
  FemSystem fem = assemble_stiffness_mass(build_mesh(10.0, k, g));
  DeficiencyBasis def = deficiency_basis(fem.mesh, -1.0);
  auto friedrichs = friedrichs_operator(fem.friedrichs);
  auto krein = assemble_extension(fem.friedrichs, def, ExtensionSpec::krein(-1.0));
  return {std::move(fem), std::move(def), std::move(friedrichs), std::move(krein)};
}

}  // namespace

TEST_CASE("resolvent of the identity at z = 0 is the identity") {
  const auto op = diagonal_operator({1.0, 1.0, 1.0});
  const Vector f = Eigen::Vector3d(0.3, -2.0, 5.0);
  CHECK((resolvent_apply(op, Shift{0.0, 1.0}, f) - f).norm() <= 1e-15);
}

TEST_CASE("diagonal resolvent") {
  const auto op = diagonal_operator({1.0, 2.0});
  const Vector u = resolvent_apply(op, Shift{-1.0, 1.0}, Eigen::Vector2d(3.0, 6.0));
  CHECK(u(0) == doctest::Approx(1.5));
  CHECK(u(1) == doctest::Approx(2.0));
}

TEST_CASE("shift above the lower bound is rejected by the definite path") {
  const auto op = diagonal_operator({1.0, 2.0});
  try {
    resolvent_apply(op, Shift{1.5, 1.0}, Eigen::Vector2d(1.0, 1.0));
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(e.kind() == "shift_too_high");
    bool names_bound = false;
    for (const auto& [key, value] : e.details()) names_bound |= key == "lower_bound_estimate" && value == doctest::Approx(1.0);
    CHECK(names_bound);
  }
  CHECK_NOTHROW(resolvent_apply(op, Shift{1.5, 1.0}, Eigen::Vector2d(1.0, 1.0), ShiftPolicy::allow_indefinite));
  CHECK_THROWS_AS(resolvent_apply(op, Shift{2.0, 1.0}, Eigen::Vector2d(1.0, 1.0), ShiftPolicy::allow_indefinite),
                  NumericalError);
  CHECK_THROWS_AS(resolvent_apply(op, Shift{-1.0, 1.0}, Eigen::Vector3d(1.0, 1.0, 1.0)), ValidationError);
}

TEST_CASE("Friedrichs resolvent on the lowest Dirichlet mode") {
  const Model m = model(2000, 1.0);
  const auto pairs = lowest_eigenpairs(m.friedrichs, 1);
  const Vector f = m.fem.friedrichs.embedding() * pairs.vectors.col(0);
  const Resolvent r(m.friedrichs, -1.0);
  const Vector u = r.apply(f);
  const double lambda = std::numbers::pi * std::numbers::pi / 100.0;
  const double expected = 1.0 / (lambda + 1.0) * mass_inner(*m.fem.ambient, f, f);
  CHECK(mass_inner(*m.fem.ambient, u, f) == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("resolvent solves: residual and mass self-adjointness") {
  const Model m = model(400);
  const Resolvent r(m.krein, -3.0);
  const DenseMatrix vecs = linalg::gaussian_matrix(m.fem.mesh.ambient_dim(), 6, 8);
  for (int c = 0; c < 3; ++c) {
    const Vector f = vecs.col(c), g = vecs.col(c + 3);
    const Vector rf = r.apply(f), rg = r.apply(g);
    const double scale = mass_norm(*m.fem.ambient, f) * mass_norm(*m.fem.ambient, g);
    CHECK(std::abs(mass_inner(*m.fem.ambient, rf, g) - mass_inner(*m.fem.ambient, f, rg)) <= 1e-10 * scale);
  }
  const Vector rhs = linalg::gaussian_matrix(m.krein.dim(), 1, 3).col(0);
  const eigen::ShiftedPencil pencil(m.krein.form().form_matrix(), m.krein.form().mass_matrix(), -3.0);
  CHECK(pencil.backward_error(r.solve(rhs), rhs) <= 1e-10);
}

TEST_CASE("lowering the form raises the resolvent quadratic form") {
  const Model m = model(300);
  const RegularizingSequence seq{SingularPotential::power_law(1.0, 1.5), std::nullopt};
  const SparseMatrix w = project_to_basis(m.krein, potential_form(m.fem.mesh, seq, 10.0, true));
  const auto lowered = perturb_form(m.krein, w, 0.5);
  const double z = lowered.lower_bound_estimate() - 1.0;
  const Resolvent r1(m.krein, z), r2(lowered, z);
  const DenseMatrix vecs = linalg::gaussian_matrix(m.fem.mesh.ambient_dim(), 5, 12);
  for (int c = 0; c < 5; ++c) {
    const Vector f = vecs.col(c);
    CHECK(mass_inner(*m.fem.ambient, r2.apply(f), f) >= mass_inner(*m.fem.ambient, r1.apply(f), f));
  }
}

TEST_CASE("lowest eigenpairs of the model operators") {
  SUBCASE("Dirichlet problem") {
    const Model m = model(2000);
    const auto pairs = lowest_eigenpairs(m.friedrichs, 2);
    const double expected = std::numbers::pi * std::numbers::pi / 100.0;
    CHECK(pairs.values[0] == doctest::Approx(expected).epsilon(5e-3));
    CHECK(pairs.residuals.maxCoeff() <= 1e-9);
  }
  SUBCASE("Krein extension at eta = -1 has eta as its lowest eigenvalue") {
    const Model m = model(2000);
    const auto pairs = lowest_eigenpairs(m.krein, 3);
    CHECK(pairs.values[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(pairs.values[1] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(pairs.values[2] > 0.0);
    const DenseMatrix gram = pairs.vectors.transpose() * (m.krein.form().mass_matrix() * pairs.vectors);
    CHECK((gram - DenseMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-9);
    const Model coarse = model(60);
    const auto dense = eigen::dense_eigenpairs(DenseMatrix(coarse.krein.form().form_matrix()),
                                               DenseMatrix(coarse.krein.form().mass_matrix()));
    CHECK(dense.values[0] == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("full spectrum of a 6 x 6 instance") {
    const auto op = diagonal_operator({3.0, -1.0, 2.5, 0.0, 7.0, 1.0});
    const auto pairs = lowest_eigenpairs(op, 6);
    const std::vector<double> expected{-1.0, 0.0, 1.0, 2.5, 3.0, 7.0};
    for (int i = 0; i < 6; ++i) CHECK(std::abs(pairs.values[i] - expected[std::size_t(i)]) <= 1e-10);
  }
}

TEST_CASE("resolvent difference norm") {
  SUBCASE("identical operators") {
    const Model m = model(100);
    CHECK(resolvent_diff_norm(m.krein, m.krein, Shift{-3.0, 1.0}, 50) <= 1e-14);
  }
  SUBCASE("diagonal pair") {
    const auto a = diagonal_operator({1.0, 2.0});
    const auto b = diagonal_operator({1.0, 3.0});
    CHECK(resolvent_diff_norm(a, b, Shift{-1.0, 1.0}, 50) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
  }
  SUBCASE("Krein and Friedrichs differ on the reference mesh") {
    const Model m = model(2000);
    const double est = resolvent_diff_norm(m.krein, m.friedrichs, Shift{-3.0, 1.0}, 100);
    CHECK(est >= 1e-3);
    // Krein(-1) is the Robin condition u'(0) = -u(0); on each half-line its
    // resolvent differs from the Dirichlet one by exp(-k(x+y)) / (k - 1), k = sqrt(-z),
    // a rank-one operator of norm 1 / (2k (k - 1))
    const double k = std::sqrt(3.0);
    CHECK(est == doctest::Approx(1.0 / (2.0 * k * (k - 1.0))).epsilon(1e-6));
  }
  SUBCASE("power iteration: nondecreasing, below the true norm, and within 1% after 200 steps") {
    const Model m = model(60);
    const RegularizingSequence seq{SingularPotential::power_law(1.0, 1.5), std::nullopt};
    const auto general = assemble_extension(m.fem.friedrichs, m.def,
                                            ExtensionSpec::general(-1.0, Eigen::Vector2d(1.0, 0.5), DenseMatrix::Constant(1, 1, 0.3)));
    const auto perturbed = perturb_form(general, project_to_basis(general, potential_form(m.fem.mesh, seq, 30.0, true)), 0.2);
    const double z = -6.0;
    const double truth = dense_difference_norm(perturbed, m.friedrichs, z);
    double previous = 0.0;
    for (int it : {1, 5, 20, 200}) {
      const double est = resolvent_diff_norm(perturbed, m.friedrichs, Shift{z, 1.0}, it, 7);
      CHECK(est >= previous);
      CHECK(est <= truth * (1.0 + 1e-12));
      previous = est;
    }
    CHECK(previous >= 0.99 * truth);
    CHECK(resolvent_diff_norm(perturbed, m.friedrichs, Shift{z, 1.0}, 30, 5) ==
          resolvent_diff_norm(perturbed, m.friedrichs, Shift{z, 1.0}, 30, 5));
  }
  SUBCASE("invalid shift for either operator") {
    const Model m = model(60);
    CHECK_THROWS_AS(resolvent_diff_norm(m.krein, m.friedrichs, Shift{0.0, 1.0}, 10), NumericalError);
  }
}

TEST_CASE("Lanczos range of a resolvent difference matches the dense spectrum") {
  const Model m = model(80);
  const double z = -2.5;
  const Resolvent rk(m.krein, z), rf(m.friedrichs, z);
  const auto range = resolvent_difference_range(rk, rf);
  const double truth = dense_difference_norm(m.krein, m.friedrichs, z);
  CHECK(range.max == doctest::Approx(truth).epsilon(1e-8));
  CHECK(range.min >= -1e-12);
}
