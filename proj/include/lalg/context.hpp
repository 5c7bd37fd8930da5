#pragma once

// An anchored bracket on sections of a trivial bundle over a box. Local
// algebroids and prolongations both expose one, and the exterior calculus
// and defect checks are written against it.

#include <cstddef>
#include <functional>
#include <string>
#include <utility>

#include "lalg/error.hpp"
#include "lalg/field.hpp"

namespace lalg {

/// Smooth section of the trivial bundle box × R^n.
using Section = VectorField;
/// Field of fiber endomorphisms.
using EndoField = MatrixField;

struct BracketContext {
  using BracketFn = std::function<Section(const Section&, const Section&)>;

  std::string name;
  Box base;
  std::size_t fiber_dim = 0;
  MatrixField anchor;  // rows = base dim, cols = fiber dim
  BracketFn bracket;
  bool claims_jacobi = false;

  Section operator()(const Section& a, const Section& b) const { return bracket(a, b); }
};

inline void require_section_of(const BracketContext& ctx, const Section& a, const char* what) {
  if (a.empty()) throw ShapeError(std::string(what) + ": empty section");
  if (!(a.domain() == ctx.base)) throw ShapeError(std::string(what) + ": section lives over a different base box");
}

/// x -> rho_x(a(x)), the vector field underlying a section.
inline VectorField anchored(const BracketContext& ctx, const Section& a) {
  require_section_of(ctx, a, "anchored");
  return VectorField(ctx.base, [rho = ctx.anchor, a](const auto& x) { return rho(x) * a(x); });
}

/// Classical bracket of vector fields, [X, Y] = DY X - DX Y.
inline VectorField vector_field_bracket(const VectorField& x_field, const VectorField& y_field) {
  if (!(x_field.domain() == y_field.domain())) throw ShapeError("vector field bracket: different domains");
  return VectorField(x_field.domain(), [x_field, y_field](const auto& x) {
    return directional_at(y_field, x, x_field(x)) - directional_at(x_field, x, y_field(x));
  });
}

/// Derivative of f along the anchor image of a: x -> df_x(rho_x a(x)).
inline ScalarField anchor_derivative(const BracketContext& ctx, const Section& a, const ScalarField& f) {
  require_section_of(ctx, a, "anchor derivative");
  if (!(f.domain() == ctx.base)) throw ShapeError("anchor derivative: function over a different box");
  return ScalarField(ctx.base, [rho = ctx.anchor, a, f](const auto& x) { return directional_at(f, x, rho(x) * a(x)); });
}

/// Constant section with value v in R^n.
inline Section constant_section(const BracketContext& ctx, const Vec<double>& v) {
  require_same_size(v.size(), ctx.fiber_dim, "constant section");
  return constant<Vec>(ctx.base, v);
}

}  // namespace lalg
