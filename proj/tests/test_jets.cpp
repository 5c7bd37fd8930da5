#include <cmath>

#include <gtest/gtest.h>

#include "lalg/field.hpp"
#include "lalg/polynomial.hpp"
#include "lalg/sampling.hpp"
#include "oracles.hpp"

using namespace lalg;

namespace {

ScalarField product_x1x2() {
  return ScalarField(Box::cube(2, -5, 5), [](const auto& x) { return x[0] * x[1]; });
}

}  // namespace

TEST(JetArithmetic, ProductAndQuotientRules) {
  J1 x(3.0, 1.0);
  J1 y = x * x / (x + J1(1.0));
  // d/dx x^2/(x+1) = (x^2 + 2x)/(x+1)^2
  EXPECT_NEAR(y.v, 9.0 / 4.0, 1e-15);
  EXPECT_NEAR(y.d, 15.0 / 16.0, 1e-15);
}

TEST(JetArithmetic, NestedJetCarriesMixedSecondDerivative) {
  // f(x) = x^3 seeded twice along e1 gives f'' in the innermost slot.
  J2 x(J1(2.0, 1.0), J1(1.0, 0.0));
  J2 y = pow(x, 3);
  EXPECT_DOUBLE_EQ(y.v.v, 8.0);
  EXPECT_DOUBLE_EQ(y.v.d, 12.0);
  EXPECT_DOUBLE_EQ(y.d.v, 12.0);
  EXPECT_DOUBLE_EQ(y.d.d, 12.0);
}

TEST(JetArithmetic, ElementaryFunctionsMatchAnalyticDerivatives) {
  const double x0 = 0.7;
  J1 x(x0, 1.0);
  EXPECT_NEAR(sin(x).d, std::cos(x0), 1e-15);
  EXPECT_NEAR(cos(x).d, -std::sin(x0), 1e-15);
  EXPECT_NEAR(exp(x).d, std::exp(x0), 1e-15);
  EXPECT_NEAR(log(x).d, 1.0 / x0, 1e-15);
  EXPECT_NEAR(sqrt(x).d, 0.5 / std::sqrt(x0), 1e-15);
}

TEST(JetArithmetic, EmbedKeepsValueAndZeroesSeeds) {
  J3 e = embed<J3>(J1(2.0, 5.0));
  EXPECT_DOUBLE_EQ(e.v.v.v, 2.0);
  EXPECT_DOUBLE_EQ(e.v.v.d, 5.0);
  EXPECT_DOUBLE_EQ(e.d.v.v, 0.0);
  EXPECT_DOUBLE_EQ(e.v.d.v, 0.0);
}

TEST(Directional, ProductMonomial) {
  EXPECT_DOUBLE_EQ(directional(product_x1x2(), {1.0, 2.0}, {1.0, 0.0}), 2.0);
}

TEST(Directional, ConstantFieldHasZeroDerivative) {
  auto c = constant<Value>(Box::cube(3), 4.5);
  EXPECT_EQ(directional(c, {0.1, 0.2, 0.3}, {1.0, -2.0, 0.5}), 0.0);
}

TEST(Directional, SineAgreesWithCentralDifference) {
  ScalarField f(Box::cube(1), [](const auto& x) { return lalg::sin(x[0]); });
  const Vec<double> x{0.3};
  double jet = directional(f, x, {1.0});
  EXPECT_NEAR(jet, std::cos(0.3), 1e-15);
  double fd = oracle::central_difference([&](const Vec<double>& y) { return f(y); }, x, {1.0}, 1e-6);
  EXPECT_NEAR(jet, fd, 1e-9);
}

TEST(Directional, RejectsBoundaryAndOutsidePoints) {
  auto f = product_x1x2();
  EXPECT_THROW(directional(f, {5.0, 0.0}, {1.0, 0.0}), DomainError);
  EXPECT_THROW(directional(f, {7.0, 0.0}, {1.0, 0.0}), DomainError);
}

TEST(Directional, RejectsDimensionMismatch) {
  auto f = product_x1x2();
  EXPECT_THROW(directional(f, {1.0, 0.0}, {1.0}), ShapeError);
  EXPECT_THROW(directional(f, {1.0}, {1.0, 0.0}), ShapeError);
}

TEST(Jacobian, LinearMapIsItsOwnJacobian) {
  Mat<double> a(2, 3);
  a.data = {1, 2, 3, -4, 5, 0.5};
  auto f = affine_map(Box::cube(3), a);
  for (const auto& x : sample_points(Box::cube(3), 8, 3)) {
    auto j = jacobian(f, x);
    EXPECT_EQ(j.data, a.data);
  }
}

TEST(Jacobian, QuadraticMatchesSymbolicDerivative) {
  VectorField f(Box::cube(2, -3, 3), [](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    return Vec<S>{x[0] * x[0], x[0] * x[1]};
  });
  auto j = jacobian(f, {1.0, 1.0});
  // d(x1^2) = (2 x1, 0), d(x1 x2) = (x2, x1)
  EXPECT_EQ(j.data, (std::vector<double>{2, 0, 1, 1}));
  auto fd = oracle::fd_jacobian([&](const Vec<double>& y) { return f(y); }, {1.0, 1.0});
  EXPECT_LT(max_abs(j - fd), 1e-8);
}

TEST(Jacobian, ConstantFieldGivesZeroMatrix) {
  auto c = constant<Vec>(Box::cube(2), Vec<double>{1.0, 2.0, 3.0});
  auto j = jacobian(c, {0.0, 0.5});
  EXPECT_EQ(j.rows, 3u);
  EXPECT_EQ(j.cols, 2u);
  EXPECT_EQ(max_abs(j), 0.0);
}

TEST(SecondDirectional, MixedPartialOfBilinearMonomial) {
  EXPECT_DOUBLE_EQ(second_directional(product_x1x2(), {0.3, -0.2}, {1, 0}, {0, 1}), 1.0);
}

TEST(SecondDirectional, ZeroSeedGivesZero) {
  EXPECT_EQ(second_directional(product_x1x2(), {0.3, -0.2}, {0, 0}, {0, 1}), 0.0);
}

TEST(SecondDirectional, CubicAtTwo) {
  ScalarField f(Box::cube(1, -5, 5), [](const auto& x) { return x[0] * x[0] * x[0]; });
  EXPECT_DOUBLE_EQ(second_directional(f, {2.0}, {1.0}, {1.0}), 12.0);
}

TEST(JetProperties, ChainRuleOnRandomPolynomialCompositions) {
  Rng rng(11);
  const Box box = Box::cube(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto h = random_poly_vector_field(rng, box, 3, 2);
    auto g = random_poly_vector_field(rng, Box::cube(3, -100, 100), 2, 3);
    auto gh = compose(g, h);
    for (const auto& x : sample_points(box, 16, 100 + trial)) {
      Vec<double> v = rng.vector(3);
      auto lhs = directional(gh, x, v);
      auto rhs = jacobian(g, h(x)) * directional(h, x, v);
      EXPECT_LT(max_abs(lhs - rhs), 1e-10);
    }
  }
}

TEST(JetProperties, SecondDerivativeIsSymmetric) {
  Rng rng(12);
  const Box box = Box::cube(3);
  auto f = random_poly_scalar_field(rng, box, 4);
  auto g = ScalarField(box, [f](const auto& x) { return lalg::sin(f(x)) * lalg::exp(x[1]); });
  for (const auto& x : sample_points(box, 64, 5)) {
    Vec<double> u = rng.vector(3), v = rng.vector(3);
    double uv = second_directional(g, x, u, v);
    double vu = second_directional(g, x, v, u);
    EXPECT_LE(std::abs(uv - vu), 1e-10 * (1.0 + std::abs(g(x))));
  }
}

TEST(JetProperties, PolynomialDerivativesMatchAnalyticToMachinePrecision) {
  // p(x) = 3 x1^2 x2 - x2^3 ; dp/dx1 = 6 x1 x2, dp/dx2 = 3 x1^2 - 3 x2^2
  auto p = poly_scalar_field(Box::cube(2), {{3.0, {2, 1}, {}}, {-1.0, {0, 3}, {}}});
  for (const auto& x : sample_points(Box::cube(2), 64, 9)) {
    double d1 = directional(p, x, {1, 0});
    double d2 = directional(p, x, {0, 1});
    double a1 = 6 * x[0] * x[1];
    double a2 = 3 * x[0] * x[0] - 3 * x[1] * x[1];
    EXPECT_LE(std::abs(d1 - a1), 1e-12 * std::max(1.0, std::abs(a1)));
    EXPECT_LE(std::abs(d2 - a2), 1e-12 * std::max(1.0, std::abs(a2)));
  }
}

TEST(JetProperties, DerivativeBeyondMaxDepthThrows) {
  auto f = product_x1x2();
  Vec<J3> x{J3(1.0), J3(2.0)};
  EXPECT_THROW(directional_at(f, x, x), DepthError);
}

TEST(Sampling, DeterministicInteriorAndSeedSensitive) {
  Box box({{-1, 1}, {0, 2}, {5, 6}});
  auto a = sample_points(box, 64, 42);
  auto b = sample_points(box, 64, 42);
  auto c = sample_points(box, 64, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& p : a) {
    for (std::size_t d = 0; d < 3; ++d) {
      double w = box[d].hi - box[d].lo;
      EXPECT_GE(p[d], box[d].lo + 0.01 * w - 1e-15);
      EXPECT_LE(p[d], box[d].hi - 0.01 * w + 1e-15);
    }
  }
}

TEST(Polynomial, RejectsMalformedTerms) {
  EXPECT_THROW(poly_scalar_field(Box::cube(2), {{1.0, {1}, {}}}), ShapeError);
  EXPECT_THROW(poly_vector_field(Box::cube(2), 2, {{1.0, {1, 0}, {2}}}), ShapeError);
  EXPECT_THROW(poly_vector_field(Box::cube(2), 2, {{1.0, {-1, 0}, {0}}}), ValidationError);
}
