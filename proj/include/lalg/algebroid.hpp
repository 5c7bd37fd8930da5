#pragma once

// Local algebroids on a chart box: anchor field, structure field and the
// bracket they determine, plus the defect functionals that certify the
// algebroid axioms and morphism conditions pointwise.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lalg/context.hpp"
#include "lalg/error.hpp"
#include "lalg/field.hpp"
#include "lalg/linalg.hpp"
#include "lalg/sampling.hpp"

namespace lalg {

/// Trivialized anchored bundle box × R^n with anchor rho and structure field C.
/// The bracket of sections is
///   [a1, a2](x) = C_x(a1(x), a2(x)) + Da2_x(rho_x a1(x)) - Da1_x(rho_x a2(x)).
class LocalAlgebroid {
 public:
  /// Checks shapes at the box center and antisymmetry of C on basis pairs at
  /// sampled points (`antisymmetry_tol` 0 demands exact antisymmetry).
  LocalAlgebroid(std::string name, Box base, std::size_t fiber_dim, MatrixField anchor, BilinearField structure,
                 bool claims_jacobi, double antisymmetry_tol = 0.0)
      : name_(std::move(name)),
        base_(std::move(base)),
        n_(fiber_dim),
        anchor_(std::move(anchor)),
        structure_(std::move(structure)),
        claims_jacobi_(claims_jacobi) {
    if (base_.dim() == 0) throw ValidationError(name_ + ": base box must have dimension >= 1");
    if (!(anchor_.domain() == base_) || !(structure_.domain() == base_)) {
      throw ShapeError(name_ + ": anchor and structure must live over the base box");
    }
    Vec<double> center(base_.dim());
    for (std::size_t i = 0; i < base_.dim(); ++i) center[i] = 0.5 * (base_[i].lo + base_[i].hi);
    auto rho = anchor_(center);
    if (rho.rows != base_.dim() || rho.cols != n_) {
      throw ShapeError(name_ + ": anchor must be " + std::to_string(base_.dim()) + "x" + std::to_string(n_));
    }
    auto c = structure_(center);
    if (c.out != n_ || c.in1 != n_ || c.in2 != n_) throw ShapeError(name_ + ": structure must map R^n x R^n to R^n");
    auto pts = sample_points(base_, 8, 0x5eed);
    pts.push_back(center);
    for (const auto& x : pts) {
      auto cx = structure_(x);
      for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = i; j < n_; ++j) {
            double s = std::abs(cx(k, i, j) + cx(k, j, i));
            if (s > antisymmetry_tol) {
              throw ValidationError(name_ + ": structure field is not antisymmetric (C(e" + std::to_string(i + 1) +
                                    ",e" + std::to_string(j + 1) + ") + C(e" + std::to_string(j + 1) + ",e" +
                                    std::to_string(i + 1) + ") has component " + std::to_string(s) + " at " +
                                    format_point(x) + ")");
            }
          }
    }
  }

  const std::string& name() const { return name_; }
  const Box& base() const { return base_; }
  std::size_t fiber_dim() const { return n_; }
  std::size_t base_dim() const { return base_.dim(); }
  const MatrixField& anchor() const { return anchor_; }
  const BilinearField& structure() const { return structure_; }
  bool claims_jacobi() const { return claims_jacobi_; }

  /// Same anchor, structure field replaced.
  LocalAlgebroid with_structure(BilinearField structure, std::string name, bool claims_jacobi) const {
    return LocalAlgebroid(std::move(name), base_, n_, anchor_, std::move(structure), claims_jacobi, 1e-12);
  }

  Section bracket(const Section& a1, const Section& a2) const {
    check_section(a1, "bracket");
    check_section(a2, "bracket");
    return Section(base_, [rho = anchor_, c = structure_, a1, a2](const auto& x) {
      auto r = rho(x);
      auto u = a1(x);
      auto w = a2(x);
      return apply(c(x), u, w) + directional_at(a2, x, r * u) - directional_at(a1, x, r * w);
    });
  }

  BracketContext context() const {
    auto self = *this;
    return BracketContext{name_, base_, n_, anchor_,
                          [self](const Section& a, const Section& b) { return self.bracket(a, b); }, claims_jacobi_};
  }
  operator BracketContext() const { return context(); }  // NOLINT: algebroids are bracket contexts

  void check_section(const Section& a, const char* what) const {
    if (a.empty()) throw ShapeError(std::string(what) + ": empty section");
    if (!(a.domain() == base_)) throw ShapeError(std::string(what) + ": section lives over a different base box");
  }

 private:
  std::string name_;
  Box base_;
  std::size_t n_ = 0;
  MatrixField anchor_;
  BilinearField structure_;
  bool claims_jacobi_ = false;
};

// ---------------------------------------------------------------------------
// Constructors.

inline LocalAlgebroid make_tangent(Box base) {
  const std::size_t m = base.dim();
  auto anchor = constant<Mat>(base, Mat<double>::identity(m));
  auto structure = constant<Bilinear>(base, Bilinear<double>(m, m, m));
  return LocalAlgebroid("tangent:" + std::to_string(m), std::move(base), m, anchor, structure, true);
}

/// Zero anchor, constant structure constants.
inline LocalAlgebroid make_lie_algebra_bundle(Box base, const Bilinear<double>& constants, bool claims_jacobi,
                                              std::string name = "lie-algebra", double antisymmetry_tol = 0.0) {
  if (constants.in1 != constants.out || constants.in2 != constants.out) {
    throw ShapeError(name + ": structure constants must map R^n x R^n to R^n");
  }
  const std::size_t n = constants.out;
  auto anchor = constant<Mat>(base, Mat<double>(base.dim(), n));
  auto structure = constant<Bilinear>(base, constants);
  return LocalAlgebroid(std::move(name), std::move(base), n, anchor, structure, claims_jacobi, antisymmetry_tol);
}

/// Structure constants of so(3): C(a, b) = a × b.
inline Bilinear<double> so3_constants() {
  Bilinear<double> c(3, 3, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t j = (i + 1) % 3;
    std::size_t k = (i + 2) % 3;
    c(k, i, j) = 1.0;
    c(k, j, i) = -1.0;
  }
  return c;
}

/// Antisymmetric constants violating Jacobi: C(e1,e2) = e1, C(e2,e3) = e2, C(e1,e3) = 0.
inline Bilinear<double> non_jacobi_constants() {
  Bilinear<double> c(3, 3, 3);
  c(0, 0, 1) = 1.0;
  c(0, 1, 0) = -1.0;
  c(1, 1, 2) = 1.0;
  c(1, 2, 1) = -1.0;
  return c;
}

/// Anchor diag(1, x1) on R^2 with C = 0; rank drops on the line x1 = 0.
inline LocalAlgebroid make_rank_drop(Box base = Box::cube(2, -3.0, 3.0)) {
  if (base.dim() != 2) throw ShapeError("rank-drop: base must be two-dimensional");
  MatrixField anchor(base, [](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    Mat<S> r(2, 2);
    r(0, 0) = S(1.0);
    r(1, 1) = x[0];
    return r;
  });
  auto structure = constant<Bilinear>(base, Bilinear<double>(2, 2, 2));
  return LocalAlgebroid("rank-drop", std::move(base), 2, anchor, structure, false);
}

/// Action algebroid of so(3) rotating R^3: rho_x(a) = x × a, C(a, b) = a × b.
inline LocalAlgebroid make_so3_action(Box base = Box::cube(3)) {
  if (base.dim() != 3) throw ShapeError("action:so3: base must be three-dimensional");
  MatrixField anchor(base, [](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    Mat<S> r(3, 3);
    r(0, 1) = -x[2];
    r(0, 2) = x[1];
    r(1, 0) = x[2];
    r(1, 2) = -x[0];
    r(2, 0) = -x[1];
    r(2, 1) = x[0];
    return r;
  });
  auto structure = constant<Bilinear>(base, so3_constants());
  return LocalAlgebroid("action:so3", std::move(base), 3, anchor, structure, true);
}

inline std::vector<std::string> builtin_algebroid_names() {
  return {"tangent", "tangent:<m>", "lie-algebra:so3", "rank-drop", "non-jacobi", "action:so3"};
}

/// Builtin registry; `box` overrides the default chart when given.
inline LocalAlgebroid make_builtin(const std::string& name, const Box* box = nullptr) {
  auto pick = [&](Box fallback) { return box ? *box : std::move(fallback); };
  if (name == "tangent") return make_tangent(pick(Box::cube(2)));
  if (name.rfind("tangent:", 0) == 0) {
    std::size_t m = 0;
    try {
      m = std::stoul(name.substr(8));
    } catch (const std::exception&) {
      throw ValidationError("unknown builtin '" + name + "'");
    }
    if (m == 0 || m > 16) throw ValidationError("tangent dimension out of range in '" + name + "'");
    if (box && box->dim() != m) throw ShapeError("'" + name + "' needs a " + std::to_string(m) + "-dimensional box");
    return make_tangent(pick(Box::cube(m)));
  }
  if (name == "lie-algebra:so3") return make_lie_algebra_bundle(pick(Box::cube(2)), so3_constants(), true, name);
  if (name == "non-jacobi") return make_lie_algebra_bundle(pick(Box::cube(2)), non_jacobi_constants(), false, name);
  if (name == "rank-drop") return make_rank_drop(pick(Box::cube(2, -3.0, 3.0)));
  if (name == "action:so3") return make_so3_action(pick(Box::cube(3)));
  throw ValidationError("unknown builtin '" + name + "'");
}

// ---------------------------------------------------------------------------
// Bracket and axiom defects (pointwise, any bracket context).

inline Section bracket(const LocalAlgebroid& alg, const Section& a1, const Section& a2) {
  return alg.bracket(a1, a2);
}

/// [a1, f a2] - f [a1, a2] - df(rho a1) a2 at x.
inline Vec<double> leibniz_defect(const BracketContext& ctx, const Section& a1, const Section& a2,
                                  const ScalarField& f, const Vec<double>& x) {
  require_interior(ctx.base, x, "leibniz_defect");
  auto lhs = ctx(a1, scale(f, a2))(x);
  auto plain = ctx(a1, a2)(x);
  double df = anchor_derivative(ctx, a1, f)(x);
  return lhs - f(x) * plain - df * a2(x);
}

/// Perturbs `a` by a term vanishing to second order at x and reports the
/// largest change of [a, b](x) over constant and linear partners b.
inline double jet_dependence_defect(const BracketContext& ctx, const Section& a, const Vec<double>& x) {
  require_interior(ctx.base, x, "jet_dependence_defect");
  require_section_of(ctx, a, "jet_dependence_defect");
  const std::size_t n = ctx.fiber_dim;
  const std::size_t m = ctx.base.dim();
  Vec<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 - 0.37 * static_cast<double>(k);
  Section perturbed(ctx.base, [a, x, w](const auto& y) {
    using S = typename std::decay_t<decltype(y)>::value_type;
    S r2(0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      S d = y[i] - S(x[i]);
      r2 += d * d;
    }
    return a(y) + r2 * embed_all<S>(w);
  });
  std::vector<Section> partners;
  for (std::size_t k = 0; k < n; ++k) {
    partners.push_back(constant_section(ctx, basis<double>(n, k)));
    std::size_t coord = k % m;
    partners.push_back(Section(ctx.base, [n, k, coord](const auto& y) {
      using S = typename std::decay_t<decltype(y)>::value_type;
      Vec<S> r(n, S(0.0));
      r[k] = S(1.0) + y[coord];
      return r;
    }));
  }
  double worst = 0.0;
  for (const auto& b : partners) {
    worst = std::max(worst, max_abs(ctx(perturbed, b)(x) - ctx(a, b)(x)));
    worst = std::max(worst, max_abs(ctx(b, perturbed)(x) - ctx(b, a)(x)));
  }
  return worst;
}

/// [a1,[a2,a3]] + [a2,[a3,a1]] + [a3,[a1,a2]] at x.
inline Vec<double> jacobiator(const BracketContext& ctx, const Section& a1, const Section& a2, const Section& a3,
                              const Vec<double>& x) {
  require_interior(ctx.base, x, "jacobiator");
  return ctx(a1, ctx(a2, a3))(x) + ctx(a2, ctx(a3, a1))(x) + ctx(a3, ctx(a1, a2))(x);
}

/// rho([a1, a2]) - [rho a1, rho a2] at x.
inline Vec<double> anchor_morphism_defect(const BracketContext& ctx, const Section& a1, const Section& a2,
                                          const Vec<double>& x) {
  require_interior(ctx.base, x, "anchor_morphism_defect");
  auto lhs = ctx.anchor(x) * ctx(a1, a2)(x);
  auto rhs = vector_field_bracket(anchored(ctx, a1), anchored(ctx, a2))(x);
  return lhs - rhs;
}

struct KernelDiagnostics {
  std::size_t rank = 0;
  std::size_t nullity = 0;
  std::size_t image_dim = 0;
  double sigma_max = 0.0;
  double sigma_min_kept = 0.0;
  bool near_cutoff = false;  // conditioning warning: a singular value sits close to the cutoff
};

inline KernelDiagnostics kernel_diagnostics(const Mat<double>& rho, double rel_cutoff = 1e-10) {
  auto info = rank_info(rho, rel_cutoff);
  return {info.rank, info.nullity, info.rank, info.sigma_max, info.sigma_min_kept, info.near_cutoff};
}

inline KernelDiagnostics kernel_diagnostics(const BracketContext& ctx, const Vec<double>& x,
                                            double rel_cutoff = 1e-10) {
  require_interior(ctx.base, x, "kernel_diagnostics");
  return kernel_diagnostics(ctx.anchor(x), rel_cutoff);
}

// ---------------------------------------------------------------------------
// Endomorphism calculus.

inline Section apply_endo(const EndoField& a_map, const Section& a) {
  return Section(a.domain(), [a_map, a](const auto& x) { return a_map(x) * a(x); });
}

/// (L_a A)(b) = [a, A b] - A [a, b] at x.
inline Vec<double> lie_derivative_endo(const BracketContext& ctx, const EndoField& a_map, const Section& a,
                                       const Section& b, const Vec<double>& x) {
  require_interior(ctx.base, x, "lie_derivative_endo");
  return ctx(a, apply_endo(a_map, b))(x) - a_map(x) * ctx(a, b)(x);
}

enum class NijenhuisVariant { minus_bracket, general };

/// [Aa, Ab] - A[Aa, b] - A[a, Ab] + last, where last is -[a, b] (minus_bracket) or +A^2[a, b] (general).
inline Vec<double> nijenhuis(const BracketContext& ctx, const EndoField& a_map, const Section& a, const Section& b,
                             const Vec<double>& x, NijenhuisVariant variant = NijenhuisVariant::minus_bracket) {
  require_interior(ctx.base, x, "nijenhuis");
  auto aa = apply_endo(a_map, a);
  auto ab = apply_endo(a_map, b);
  auto ax = a_map(x);
  auto plain = ctx(a, b)(x);
  Vec<double> r = ctx(aa, ab)(x) - ax * ctx(aa, b)(x) - ax * ctx(a, ab)(x);
  if (variant == NijenhuisVariant::minus_bracket) return r - plain;
  return r + ax * (ax * plain);
}

// ---------------------------------------------------------------------------
// Morphisms.

/// Bundle map over psi: source box -> target box, fiberwise Phi(x): R^n1 -> R^n2.
struct BundleMorphism {
  VectorField base_map;
  MatrixField fiber_map;
  Box target;

  const Box& source() const { return base_map.domain(); }

  /// psi(x), failing if it leaves the target box.
  Vec<double> image_of(const Vec<double>& x) const {
    auto y = base_map(x);
    if (!target.interior(y)) throw DomainError("morphism maps " + format_point(x) + " outside the target box");
    return y;
  }

  /// Rejects base maps that leave the target box on sampled points.
  void check_into(std::size_t count = 64, std::uint64_t seed = 1) const {
    for (const auto& x : sample_points(source(), count, seed)) image_of(x);
  }
};

inline BundleMorphism identity_morphism(const Box& box, std::size_t n) {
  return {identity_map(box), constant<Mat>(box, Mat<double>::identity(n)), box};
}

/// psi(x) = T x + t, Phi constant.
inline BundleMorphism linear_morphism(const Box& source, const Box& target, const Mat<double>& t,
                                      const Mat<double>& phi, const Vec<double>& offset = {}) {
  BundleMorphism m{affine_map(source, t, offset), constant<Mat>(source, phi), target};
  m.check_into();
  return m;
}

struct LieMorphismDefect {
  Mat<double> lm1;  // rho2(psi x) Phi(x) - T_x psi rho1(x)
  Vec<double> rs1;  // Phi a1 - a1' o psi
  Vec<double> rs2;
  Vec<double> lm2;  // Phi [a1, a2]_1 - [a1', a2']_2 o psi
  double lm1_max() const { return max_abs(lm1); }
  double rs_max() const { return std::max(max_abs(rs1), max_abs(rs2)); }
  double lm2_max() const { return max_abs(lm2); }
};

inline LieMorphismDefect lie_morphism_defect(const BracketContext& ctx1, const BracketContext& ctx2,
                                             const BundleMorphism& phi, const std::pair<Section, Section>& pair1,
                                             const std::pair<Section, Section>& pair2, const Vec<double>& x) {
  require_interior(ctx1.base, x, "lie_morphism_defect");
  if (!(phi.source() == ctx1.base) || !(phi.target == ctx2.base)) {
    throw ShapeError("lie_morphism_defect: morphism boxes do not match the contexts");
  }
  auto y = phi.image_of(x);
  auto fx = phi.fiber_map(x);
  LieMorphismDefect d;
  d.lm1 = ctx2.anchor(y) * fx - jacobian(phi.base_map, x) * ctx1.anchor(x);
  d.rs1 = fx * pair1.first(x) - pair2.first(y);
  d.rs2 = fx * pair1.second(x) - pair2.second(y);
  d.lm2 = fx * ctx1(pair1.first, pair1.second)(x) - ctx2(pair2.first, pair2.second)(y);
  return d;
}

}  // namespace lalg
