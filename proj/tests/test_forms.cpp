#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lalg/forms.hpp"
#include "oracles.hpp"

using namespace lalg;

namespace {

Vec<double> e(std::size_t n, std::size_t k) { return basis<double>(n, k); }

std::function<double(const std::vector<Vec<double>>&)> at(const KForm& w, const Vec<double>& x) {
  return [w, x](const std::vector<Vec<double>>& args) { return w(x, args); };
}

std::vector<Vec<double>> random_args(Rng& rng, std::size_t k, std::size_t n) {
  std::vector<Vec<double>> a;
  for (std::size_t i = 0; i < k; ++i) a.push_back(rng.vector(n));
  return a;
}

}  // namespace

// --- insertion -----------------------------------------------------------------

TEST(Insert, ZeroFormGivesZero) {
  auto t = make_tangent(Box::cube(2));
  auto f = function_form(ScalarField(t.base(), [](const auto& x) { return x[0] + 3.0; }), 2);
  auto i = insert(constant_section(t, {1, 1}), f);
  EXPECT_EQ(i.degree(), 0u);
  EXPECT_EQ(i({0.2, 0.3}, {}), 0.0);
}

TEST(Insert, OneFormBecomesItsEvaluation) {
  auto t = make_tangent(Box::cube(2));
  Rng rng(1);
  auto w = random_form(rng, t.base(), 2, 1);
  auto a = fixture::random_section(rng, t);
  auto i = insert(a, w);
  for (const auto& x : sample_points(t.base(), 8, 1)) EXPECT_DOUBLE_EQ(i(x, {}), w(x, {a(x)}));
}

TEST(Insert, AreaFormWithFirstBasisVector) {
  auto base = Box::cube(2);
  auto area = coordinate_form(base, 2, {0, 1});
  auto i = insert(constant<Vec>(base, e(2, 0)), area);
  Rng rng(2);
  for (int p = 0; p < 8; ++p) {
    auto v = rng.vector(2);
    // Shuffle expansion: (dx1∧dx2)(e1, v) = 1*v2 - 0*v1.
    EXPECT_DOUBLE_EQ(i({0.0, 0.0}, {v}), v[1]);
  }
}

TEST(Insert, RejectsFiberMismatch) {
  auto base = Box::cube(2);
  auto w = coordinate_form(base, 3, {0});
  EXPECT_THROW(insert(constant<Vec>(base, e(2, 0)), w), ShapeError);
}

// --- wedge -----------------------------------------------------------------------

TEST(Wedge, FunctionTimesForm) {
  Rng rng(3);
  auto base = Box::cube(2);
  auto f = random_poly_scalar_field(rng, base, 2);
  auto w = random_form(rng, base, 3, 2);
  auto fw = wedge(function_form(f, 3), w);
  for (const auto& x : sample_points(base, 8, 3)) {
    auto args = random_args(rng, 2, 3);
    EXPECT_NEAR(fw(x, args), f(x) * w(x, args), 1e-14);
  }
}

TEST(Wedge, DeterminantConvention) {
  auto base = Box::cube(3);
  auto dx1 = coordinate_form(base, 3, {0}), dx2 = coordinate_form(base, 3, {1}), dx3 = coordinate_form(base, 3, {2});
  auto w12 = wedge(dx1, dx2);
  Vec<double> x{0, 0, 0};
  EXPECT_EQ(w12(x, {e(3, 0), e(3, 1)}), 1.0);
  EXPECT_EQ(w12(x, {e(3, 1), e(3, 0)}), -1.0);
  auto left = wedge(w12, dx3);
  auto right = wedge(dx1, wedge(dx2, dx3));
  EXPECT_EQ(left(x, {e(3, 0), e(3, 1), e(3, 2)}), 1.0);
  EXPECT_EQ(right(x, {e(3, 0), e(3, 1), e(3, 2)}), 1.0);
  // Permutation-sum oracle on the coordinate minors.
  Rng rng(4);
  for (int p = 0; p < 8; ++p) {
    auto args = random_args(rng, 3, 3);
    EXPECT_NEAR(left(x, args), oracle::coordinate_wedge({0, 1, 2}, args), 1e-14);
  }
}

TEST(Wedge, MatchesPermutationSumOracle) {
  Rng rng(5);
  auto base = Box::cube(2);
  for (std::size_t k = 0; k <= 2; ++k)
    for (std::size_t l = 0; l + k <= 4; ++l) {
      auto eta = random_form(rng, base, 4, k);
      auto zeta = random_form(rng, base, 4, l);
      auto w = wedge(eta, zeta);
      for (const auto& x : sample_points(base, 4, 5)) {
        auto args = random_args(rng, k + l, 4);
        EXPECT_NEAR(w(x, args), oracle::permutation_wedge(at(eta, x), k, at(zeta, x), l, args), 1e-12);
      }
    }
}

// --- d_rho and Lie derivative ------------------------------------------------------

TEST(DRhoFn, TangentGradient) {
  auto t = make_tangent(Box::cube(2));
  auto df = d_rho_fn(t, ScalarField(t.base(), [](const auto& x) { return x[0] * x[1]; }));
  for (const auto& x : sample_points(t.base(), 8, 6)) {
    EXPECT_DOUBLE_EQ(df(x, {e(2, 0)}), x[1]);
    EXPECT_DOUBLE_EQ(df(x, {e(2, 1)}), x[0]);
  }
}

TEST(DRhoFn, ZeroAnchorAndConstantFunctionGiveZero) {
  auto g = make_builtin("lie-algebra:so3");
  Rng rng(7);
  auto f = random_poly_scalar_field(rng, g.base(), 3);
  auto df = d_rho_fn(g, f);
  auto t = make_tangent(Box::cube(2));
  auto dc = d_rho_fn(t, constant<Value>(t.base(), 7.0));
  for (const auto& x : sample_points(g.base(), 8, 7)) {
    EXPECT_EQ(df(x, {rng.vector(3)}), 0.0);
    EXPECT_EQ(dc(x, {rng.vector(2)}), 0.0);
  }
}

TEST(LieDerivativeForm, ShearOfCoordinateForm) {
  auto t = make_tangent(Box::cube(2));
  Section a(t.base(), [](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    return Vec<S>{x[1], S(0.0)};
  });
  auto l = lie_derivative_form(t, a, coordinate_form(t.base(), 2, {0}));
  for (const auto& x : sample_points(t.base(), 8, 8)) {
    EXPECT_DOUBLE_EQ(l(x, {e(2, 1)}), 1.0);
    EXPECT_DOUBLE_EQ(l(x, {e(2, 0)}), 0.0);
  }
}

TEST(LieDerivativeForm, ZeroAnchorIsMinusStructureInsertions) {
  auto g = make_builtin("lie-algebra:so3");
  Rng rng(9);
  Vec<double> av = rng.vector(3);
  auto w = random_form(rng, g.base(), 3, 2, 0);  // constant coefficients
  auto l = lie_derivative_form(g, constant_section(g, av), w);
  auto cross = [](const Vec<double>& u, const Vec<double>& v) {
    return Vec<double>{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  };
  for (const auto& x : sample_points(g.base(), 8, 9)) {
    auto args = random_args(rng, 2, 3);
    double expected = -w(x, {cross(av, args[0]), args[1]}) - w(x, {args[0], cross(av, args[1])});
    EXPECT_NEAR(l(x, args), expected, 1e-14);
  }
}

TEST(LieDerivativeForm, ZeroSectionGivesZero) {
  auto alg = make_builtin("action:so3");
  Rng rng(10);
  auto w = random_form(rng, alg.base(), 3, 2);
  auto l = lie_derivative_form(alg, constant_section(alg, {0, 0, 0}), w);
  for (const auto& x : sample_points(alg.base(), 8, 10)) EXPECT_EQ(l(x, random_args(rng, 2, 3)), 0.0);
}

// --- exterior derivative ------------------------------------------------------------

TEST(ExteriorDerivative, TangentShearForm) {
  auto t = make_tangent(Box::cube(2));
  auto w = coordinate_form(ScalarField(t.base(), [](const auto& x) { return x[1]; }), 2, {0});
  auto dw = exterior_derivative(t, w);
  for (const auto& x : sample_points(t.base(), 16, 11)) EXPECT_DOUBLE_EQ(dw(x, {e(2, 0), e(2, 1)}), -1.0);
}

TEST(ExteriorDerivative, ConstantOneFormIsClosedOnTangent) {
  auto t = make_tangent(Box::cube(3));
  auto dw = exterior_derivative(t, constant_one_form(t.base(), {1.0, -2.0, 0.5}));
  Rng rng(12);
  for (const auto& x : sample_points(t.base(), 8, 12)) EXPECT_EQ(dw(x, random_args(rng, 2, 3)), 0.0);
}

TEST(ExteriorDerivative, DoubleApplicationOnProductFunction) {
  auto t = make_tangent(Box::cube(2));
  auto f = ScalarField(t.base(), [](const auto& x) { return x[0] * x[1]; });
  auto ddf = exterior_derivative(t, d_rho_fn(t, f));
  for (const auto& x : sample_points(t.base(), 16, 13)) EXPECT_LE(std::abs(ddf(x, {e(2, 0), e(2, 1)})), 1e-9);
}

TEST(ExteriorDerivative, DegreeZeroReducesExactlyToDRho) {
  Rng rng(14);
  for (const auto& alg : fixture::builtin_instances()) {
    auto f = random_poly_scalar_field(rng, alg.base(), 3);
    auto d8 = exterior_derivative(alg, function_form(f, alg.fiber_dim()));
    auto d9 = d_rho_fn(alg, f);
    for (const auto& x : sample_points(alg.base(), 8, 14)) {
      Vec<double> v = rng.vector(alg.fiber_dim());
      EXPECT_EQ(d8(x, {v}), d9(x, {v})) << alg.name();
    }
  }
}

TEST(ExteriorDerivative, PointwiseEvaluationMatchesSectionFormula) {
  Rng rng(15);
  for (const auto& alg : fixture::builtin_instances()) {
    const std::size_t n = alg.fiber_dim();
    auto w = random_form(rng, alg.base(), n, 1);
    auto dw = exterior_derivative(alg, w);
    auto a = fixture::random_section(rng, alg), b = fixture::random_section(rng, alg);
    for (const auto& x : sample_points(alg.base(), 8, 15)) {
      double pointwise = dw(x, {a(x), b(x)});
      double sections = exterior_derivative_on_sections(alg, w, {a, b}, x);
      EXPECT_NEAR(pointwise, sections, 1e-10 * std::max(1.0, std::abs(sections))) << alg.name();
    }
  }
}

TEST(ExteriorDerivative, RejectsFormOnAnotherBundle) {
  auto t = make_tangent(Box::cube(2));
  EXPECT_THROW(exterior_derivative(t, coordinate_form(t.base(), 3, {0})), ShapeError);
}

// --- pullback and morphism conditions -------------------------------------------------

TEST(PullbackForm, IdentityZeroAndLinear) {
  auto t = make_tangent(Box::cube(2));
  Rng rng(16);
  auto w = random_form(rng, t.base(), 2, 2);
  auto same = pullback_form(identity_morphism(t.base(), 2), w);
  BundleMorphism zero{identity_map(t.base()), constant<Mat>(t.base(), Mat<double>(2, 2)), t.base()};
  auto killed = pullback_form(zero, w);
  for (const auto& x : sample_points(t.base(), 8, 16)) {
    auto args = random_args(rng, 2, 2);
    EXPECT_EQ(same(x, args), w(x, args));
    EXPECT_EQ(killed(x, args), 0.0);
  }
  Mat<double> tm(2, 2);
  tm.data = {0.5, 0.1, -0.2, 0.3};
  Vec<double> xi{2.0, -1.0};
  auto pulled = pullback_form(linear_morphism(t.base(), t.base(), tm, tm), constant_one_form(t.base(), xi));
  for (const auto& x : sample_points(t.base(), 8, 17)) {
    for (std::size_t k = 0; k < 2; ++k) {
      double expected = xi[0] * tm(0, k) + xi[1] * tm(1, k);
      EXPECT_NEAR(pulled(x, {e(2, k)}), expected, 1e-15);
    }
  }
}

TEST(PullbackForm, EscapingBaseMapIsDomainError) {
  auto t = make_tangent(Box::cube(2));
  BundleMorphism m{affine_map(t.base(), 3.0 * Mat<double>::identity(2)), constant<Mat>(t.base(), Mat<double>::identity(2)),
                   t.base()};
  auto pulled = pullback_form(m, constant_one_form(t.base(), {1.0, 0.0}));
  EXPECT_THROW(pulled({0.9, 0.0}, {e(2, 0)}), DomainError);
}

TEST(LamDefect, IdentityIsExactlyZero) {
  Rng rng(18);
  for (const auto& alg : fixture::builtin_instances()) {
    auto f = random_poly_scalar_field(rng, alg.base(), 2);
    auto w = random_form(rng, alg.base(), alg.fiber_dim(), 1);
    auto id = identity_morphism(alg.base(), alg.fiber_dim());
    for (const auto& x : sample_points(alg.base(), 4, 18)) {
      auto d = lam_defect(alg, alg, id, f, w, x);
      EXPECT_EQ(d.lam1_max(), 0.0) << alg.name();
      EXPECT_EQ(d.lam2_max(), 0.0) << alg.name();
    }
  }
}

TEST(LamDefect, InvertibleLinearTangentMapIsAlgebroidMorphism) {
  auto src = make_tangent(Box::cube(2, -0.5, 0.5));
  auto dst = make_tangent(Box::cube(2));
  Mat<double> tm(2, 2);
  tm.data = {1.2, 0.3, -0.4, 0.9};
  auto phi = linear_morphism(src.base(), dst.base(), tm, tm);
  Rng rng(19);
  auto f = random_poly_scalar_field(rng, dst.base(), 3);
  auto w = random_form(rng, dst.base(), 2, 1, 3);
  for (const auto& x : sample_points(src.base(), 16, 19)) {
    auto d = lam_defect(src, dst, phi, f, w, x);
    EXPECT_LE(d.lam1_max(), 1e-9);
    EXPECT_LE(d.lam2_max(), 1e-9);
  }
}

TEST(LamDefect, AnchorIncompatibleMapIsReported) {
  auto t = make_tangent(Box::cube(2));
  Mat<double> twice = 2.0 * Mat<double>::identity(2);
  BundleMorphism m{identity_map(t.base()), constant<Mat>(t.base(), twice), t.base()};
  auto f = ScalarField(t.base(), [](const auto& x) { return x[0]; });
  auto d = lam_defect(t, t, m, f, constant_one_form(t.base(), {1, 0}), {0.1, 0.2});
  EXPECT_NEAR(d.lam1_max(), 1.0, 1e-15);
}

// --- invariants ---------------------------------------------------------------------

TEST(FormInvariants, ConstructedFormsAreMultilinearAndAlternating) {
  Rng rng(20);
  for (const auto& alg : fixture::builtin_instances()) {
    const std::size_t n = alg.fiber_dim();
    auto w1 = random_form(rng, alg.base(), n, 1);
    auto w2 = random_form(rng, alg.base(), n, 2);
    auto a = fixture::random_section(rng, alg);
    std::vector<KForm> forms{w2, wedge(w1, w1), wedge(w1, random_form(rng, alg.base(), n, 1)),
                             exterior_derivative(alg, w1), lie_derivative_form(alg, a, w2), insert(a, w2)};
    for (const auto& x : sample_points(alg.base(), 8, 20))
      for (const auto& w : forms) EXPECT_LE(form_axiom_defect(w, x, rng), 1e-10) << alg.name();
  }
}

TEST(FormInvariants, InsertionIsAnAntiDerivation) {
  Rng rng(21);
  auto base = Box::cube(2);
  for (std::size_t k = 0; k <= 2; ++k)
    for (std::size_t l = 0; l <= 2; ++l) {
      auto w = random_form(rng, base, 4, k), wp = random_form(rng, base, 4, l);
      auto a = random_poly_vector_field(rng, base, 4);
      auto lhs = insert(a, wedge(w, wp));
      if (k + l == 0) continue;
      for (const auto& x : sample_points(base, 8, 21)) {
        auto args = random_args(rng, k + l - 1, 4);
        double rhs = 0.0;
        if (k > 0) rhs += wedge(insert(a, w), wp)(x, args);
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        if (l > 0) rhs += sign * wedge(w, insert(a, wp))(x, args);
        EXPECT_NEAR(lhs(x, args), rhs, 1e-10);
      }
    }
}

TEST(FormInvariants, WedgeIsGradedCommutativeAndAssociative) {
  Rng rng(22);
  auto base = Box::cube(2);
  for (std::size_t k = 0; k <= 2; ++k)
    for (std::size_t l = 0; l <= 2; ++l) {
      auto eta = random_form(rng, base, 5, k), zeta = random_form(rng, base, 5, l), xi = random_form(rng, base, 5, 1);
      auto ez = wedge(eta, zeta), ze = wedge(zeta, eta);
      auto assoc_l = wedge(wedge(eta, zeta), xi), assoc_r = wedge(eta, wedge(zeta, xi));
      double sign = ((k * l) % 2 == 0) ? 1.0 : -1.0;
      for (const auto& x : sample_points(base, 4, 22)) {
        auto args = random_args(rng, k + l, 5);
        EXPECT_NEAR(ez(x, args), sign * ze(x, args), 1e-10);
        auto args3 = random_args(rng, k + l + 1, 5);
        EXPECT_NEAR(assoc_l(x, args3), assoc_r(x, args3), 1e-10);
      }
    }
}

TEST(FormInvariants, DSquaredVanishesOnLieAlgebroids) {
  Rng rng(23);
  for (const auto& alg : fixture::jacobi_instances()) {
    const std::size_t n = alg.fiber_dim();
    auto f = random_poly_scalar_field(rng, alg.base(), 3);
    auto w = random_form(rng, alg.base(), n, 1, 2);
    auto ddf = exterior_derivative(alg, exterior_derivative(alg, function_form(f, n)));
    auto ddw = exterior_derivative(alg, exterior_derivative(alg, w));
    for (const auto& x : sample_points(alg.base(), 64, 23)) {
      EXPECT_LE(std::abs(ddf(x, random_args(rng, 2, n))), 1e-8) << alg.name();
      if (n >= 3) {
        EXPECT_LE(std::abs(ddw(x, random_args(rng, 3, n))), 1e-8) << alg.name();
      }
    }
  }
}

TEST(FormInvariants, DSquaredDetectsJacobiFailure) {
  auto bad = make_builtin("non-jacobi");
  // d(d omega)(e1, e2, e3) = -omega(J(e1, e2, e3)) for constant omega and zero anchor.
  auto w = constant_one_form(bad.base(), {1.0, 0.0, 0.0});
  auto ddw = exterior_derivative(bad, exterior_derivative(bad, w));
  EXPECT_NEAR(std::abs(ddw({0.1, 0.2}, {e(3, 0), e(3, 1), e(3, 2)})), 1.0, 1e-12);
}

TEST(FormInvariants, WedgeLeibnizRule) {
  Rng rng(24);
  for (const auto& alg : fixture::builtin_instances()) {
    const std::size_t n = alg.fiber_dim();
    for (std::size_t k = 0; k <= 1; ++k) {
      auto eta = random_form(rng, alg.base(), n, k), zeta = random_form(rng, alg.base(), n, 1);
      auto lhs = exterior_derivative(alg, wedge(eta, zeta));
      auto r1 = wedge(exterior_derivative(alg, eta), zeta);
      auto r2 = wedge(eta, exterior_derivative(alg, zeta));
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      for (const auto& x : sample_points(alg.base(), 16, 24)) {
        auto args = random_args(rng, k + 2, n);
        if (k + 2 > n) continue;
        double defect = lhs(x, args) - r1(x, args) - sign * r2(x, args);
        EXPECT_LE(std::abs(defect), 1e-8) << alg.name();
      }
    }
  }
}

TEST(FormInvariants, LieDerivativeCommutesWithDRho) {
  Rng rng(25);
  for (const auto& alg : fixture::jacobi_instances()) {
    auto f = random_poly_scalar_field(rng, alg.base(), 3);
    auto a = fixture::random_section(rng, alg);
    auto lhs = lie_derivative_form(alg, a, d_rho_fn(alg, f));
    auto rhs = d_rho_fn(alg, anchor_derivative(alg, a, f));
    for (const auto& x : sample_points(alg.base(), 32, 25)) {
      Vec<double> v = rng.vector(alg.fiber_dim());
      EXPECT_LE(std::abs(lhs(x, {v}) - rhs(x, {v})), 1e-8) << alg.name();
    }
  }
}

TEST(FormInvariants, TangentExteriorDerivativeMatchesDeRhamOracle) {
  auto t = make_tangent(Box::cube(3));
  Rng rng(26);
  auto w = random_poly_vector_field(rng, t.base(), 3, 3);
  auto dw = exterior_derivative(t, one_form(w));
  for (const auto& x : sample_points(t.base(), 32, 26)) {
    auto jac = oracle::fd_jacobian([&](const Vec<double>& y) { return w(y); }, x);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) {
        double classical = jac(j, i) - jac(i, j);  // d_i w_j - d_j w_i
        EXPECT_LE(std::abs(dw(x, {e(3, i), e(3, j)}) - classical), 1e-7);
      }
  }
}
