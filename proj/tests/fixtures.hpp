#pragma once

#include <string>
#include <vector>

#include "lalg/algebroid.hpp"
#include "lalg/polynomial.hpp"
#include "lalg/prolong.hpp"

namespace fixture {

inline std::vector<lalg::LocalAlgebroid> builtin_instances() {
  return {lalg::make_builtin("tangent:2"), lalg::make_builtin("tangent:3"), lalg::make_builtin("lie-algebra:so3"),
          lalg::make_builtin("rank-drop"), lalg::make_builtin("action:so3")};
}

inline std::vector<lalg::LocalAlgebroid> jacobi_instances() {
  return {lalg::make_builtin("tangent:2"), lalg::make_builtin("tangent:3"), lalg::make_builtin("lie-algebra:so3"),
          lalg::make_builtin("action:so3")};
}

inline lalg::Section random_section(lalg::Rng& rng, const lalg::LocalAlgebroid& alg, int degree = 2) {
  return lalg::random_poly_vector_field(rng, alg.base(), alg.fiber_dim(), degree);
}

inline lalg::ProjectableSection random_projectable(lalg::Rng& rng, const lalg::Prolongation& prol, int degree = 2) {
  return lalg::make_projectable(prol, lalg::random_poly_vector_field(rng, prol.fibration().base, prol.alg_dim(), degree),
                                lalg::random_poly_vector_field(rng, prol.total(), prol.fiber_dim(), degree));
}

inline lalg::ProjectableSection random_vertical(lalg::Rng& rng, const lalg::Prolongation& prol, int degree = 2) {
  return lalg::vertical_lift(prol, lalg::random_poly_vector_field(rng, prol.total(), prol.fiber_dim(), degree));
}

/// sum of `terms` random polynomial multiples of random projectable sections.
inline lalg::ModuleSection random_module(lalg::Rng& rng, const lalg::Prolongation& prol, std::size_t terms = 2,
                                         bool vertical = false) {
  std::vector<lalg::ProjectableSection> gens;
  for (std::size_t i = 0; i < terms; ++i) gens.push_back(vertical ? random_vertical(rng, prol) : random_projectable(rng, prol));
  return lalg::ModuleSection(lalg::random_poly_vector_field(rng, prol.total(), terms, 1), std::move(gens));
}

}  // namespace fixture
