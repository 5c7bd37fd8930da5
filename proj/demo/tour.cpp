// A short walk through the library: brackets, forms, a prolongation, a
// connection and a tower. Prints a handful of numbers and exits.

#include <cstdio>

#include "lalg/lalg.hpp"

using namespace lalg;

int main() {
  Rng rng(3);

  // The so(3) action on R^3: a Lie algebroid whose anchor drops rank at the origin.
  auto action = make_builtin("action:so3");
  const BracketContext ctx = action;
  auto a = random_poly_vector_field(rng, action.base(), 3, 2);
  auto b = random_poly_vector_field(rng, action.base(), 3, 2);
  auto c = random_poly_vector_field(rng, action.base(), 3, 2);
  const Vec<double> x{0.2, -0.4, 0.1};
  std::printf("action:so3   |J(a,b,c)| = %.2e   rank(rho) = %zu\n", max_abs(jacobiator(ctx, a, b, c, x)),
              kernel_diagnostics(ctx, x).rank);

  // The non-Jacobi bracket: d^2 of the coordinate 1-form e^1 picks up the jacobiator.
  auto skew = make_builtin("non-jacobi");
  const BracketContext sctx = skew;
  auto dd = exterior_derivative(sctx, exterior_derivative(sctx, constant_one_form(skew.base(), basis<double>(3, 0))));
  std::printf("non-jacobi   d^2 e^1 (e1,e2,e3) = %.3f\n",
              dd({0.1, 0.2}, {basis<double>(3, 0), basis<double>(3, 1), basis<double>(3, 2)}));

  // Prolong the tangent bundle of the plane over itself and count kernels.
  auto prol = prolong_over_self(make_tangent(Box::cube(2)));
  auto k = kernel_identity(prol, {0.1, 0.2, -0.3, 0.4});
  std::printf("prolongation dim %zu   nullity(rho) %zu   nullity(hat rho) %zu   nullity(Tp hat rho) %zu\n",
              prol.derived().fiber_dim(), k.base_nullity, k.hat_nullity, k.projected_nullity);

  // A connection with random Christoffel data; N is an involution.
  Connection conn(prol, random_poly_matrix_field(rng, prol.total(), prol.fiber_dim(), prol.alg_dim(), 2));
  std::printf("connection   |N^2 - I| = %.1e\n", connection_defects(conn, {0.1, 0.2, -0.3, 0.4}).involution);

  // A three-level coordinate tower and its invariant checks.
  auto tower = make_coordinate_tower(TowerKind::projective, {1, 2, 3});
  for (const auto& r : check_tower(tower, 16, 5)) {
    std::printf("tower        %-32s %s  %.1e\n", r.check.c_str(), r.pass() ? "ok  " : "FAIL", r.defect);
  }
}
