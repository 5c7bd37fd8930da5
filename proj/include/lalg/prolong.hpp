#pragma once

// Prolongation of a local algebroid over a fibered box U × O. Elements are
// stored in trivialized form (a, z); the base tangent part v = rho_x(a) is
// reconstructed when needed, so the defining constraint holds by construction.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lalg/algebroid.hpp"
#include "lalg/context.hpp"
#include "lalg/error.hpp"
#include "lalg/field.hpp"
#include "lalg/linalg.hpp"
#include "lalg/sampling.hpp"

namespace lalg {

/// Trivial fibration base × fiber -> base.
struct Fibration {
  Box base;
  Box fiber;

  Fibration(Box base_box, Box fiber_box) : base(std::move(base_box)), fiber(std::move(fiber_box)) {
    if (base.dim() == 0) throw ValidationError("fibration: base box must have dimension >= 1");
    if (fiber.dim() == 0) throw ValidationError("fibration: fiber box must have dimension >= 1");
  }

  Box total() const { return base.times(fiber); }
  std::size_t base_dim() const { return base.dim(); }
  std::size_t fiber_dim() const { return fiber.dim(); }
};

namespace detail {

inline LocalAlgebroid derive_prolongation(const LocalAlgebroid& alg, const Fibration& fib) {
  const std::size_t m = fib.base_dim();
  const std::size_t e = fib.fiber_dim();
  const std::size_t n = alg.fiber_dim();
  const Box total = fib.total();
  MatrixField anchor(total, [rho = alg.anchor(), m, n, e](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    auto r = rho(slice(p, 0, m));
    Mat<S> hat(m + e, n + e);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) hat(i, j) = r(i, j);
    for (std::size_t k = 0; k < e; ++k) hat(m + k, n + k) = S(1.0);
    return hat;
  });
  BilinearField structure(total, [c = alg.structure(), m, n, e](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    auto cx = c(slice(p, 0, m));
    Bilinear<S> hat(n + e, n + e, n + e);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hat(k, i, j) = cx(k, i, j);
    return hat;
  });
  return LocalAlgebroid("prolongation(" + alg.name() + ")", total, n + e, anchor, structure, alg.claims_jacobi(),
                        1e-12);
}

}  // namespace detail

/// T^A M: anchor (a, z) -> (rho_x a, z), structure ((a, z), (a', z')) -> (C_x(a, a'), 0).
class Prolongation {
 public:
  Prolongation(LocalAlgebroid alg, Fibration fib)
      : alg_(std::move(alg)), fib_(std::move(fib)), derived_(check_and_derive(alg_, fib_)) {}

  const LocalAlgebroid& algebroid() const { return alg_; }
  const Fibration& fibration() const { return fib_; }
  const LocalAlgebroid& derived() const { return derived_; }
  Box total() const { return derived_.base(); }
  std::size_t base_dim() const { return fib_.base_dim(); }
  std::size_t fiber_dim() const { return fib_.fiber_dim(); }
  std::size_t alg_dim() const { return alg_.fiber_dim(); }
  const MatrixField& hat_anchor() const { return derived_.anchor(); }

 private:
  static LocalAlgebroid check_and_derive(const LocalAlgebroid& alg, const Fibration& fib) {
    if (!(alg.base() == fib.base)) throw ShapeError("prolongation: algebroid base and fibration base differ");
    return detail::derive_prolongation(alg, fib);
  }

  LocalAlgebroid alg_;
  Fibration fib_;
  LocalAlgebroid derived_;
};

inline Prolongation build_prolongation(const LocalAlgebroid& alg, const Fibration& fib) {
  return Prolongation(alg, fib);
}

/// Prolongation of A over itself; the fiber box defaults to [-1, 1]^n.
inline Prolongation prolong_over_self(const LocalAlgebroid& alg, const Box* fiber = nullptr) {
  return Prolongation(alg, Fibration(alg.base(), fiber ? *fiber : Box::cube(alg.fiber_dim())));
}

/// v - rho_x(a) for a candidate element (a, (v, z)) over (x, e).
inline Vec<double> membership_defect(const Prolongation& prol, const Vec<double>& at, const Vec<double>& a,
                                     const Vec<double>& tangent) {
  require_interior(prol.total(), at, "membership_defect");
  require_same_size(a.size(), prol.alg_dim(), "membership_defect: algebroid vector");
  require_same_size(tangent.size(), prol.base_dim() + prol.fiber_dim(), "membership_defect: tangent vector");
  const std::size_t m = prol.base_dim();
  return slice(tangent, 0, m) - prol.algebroid().anchor()(slice(at, 0, m)) * a;
}

// ---------------------------------------------------------------------------
// Projectable and module sections.

/// X(x, e) = (a(x), z(x, e)) with a a section of the algebroid over the base.
class ProjectableSection {
 public:
  ProjectableSection(const Prolongation& prol, Section a, VectorField z)
      : a_(std::move(a)), z_(std::move(z)), m_(prol.base_dim()) {
    prol.algebroid().check_section(a_, "projectable section");
    if (!(z_.domain() == prol.total())) throw ShapeError("projectable section: z must live over the total box");
    const Box total = prol.total();
    Vec<double> center(total.dim());
    for (std::size_t i = 0; i < total.dim(); ++i) center[i] = 0.5 * (total[i].lo + total[i].hi);
    require_same_size(z_(center).size(), prol.fiber_dim(), "projectable section: z");
    require_same_size(a_(slice(center, 0, m_)).size(), prol.alg_dim(), "projectable section: a");
    total_ = Section(total, [a = a_, z = z_, m = m_](const auto& p) { return concat(a(slice(p, 0, m)), z(p)); });
  }

  const Section& a() const { return a_; }
  const VectorField& z() const { return z_; }
  /// The assembled section of the prolongation over the total box.
  const Section& section() const { return total_; }

 private:
  Section a_;
  VectorField z_;
  std::size_t m_;
  Section total_;
};

inline ProjectableSection make_projectable(const Prolongation& prol, const Section& a, const VectorField& z) {
  return ProjectableSection(prol, a, z);
}

/// Variant taking `a` over the total box: rejected when it varies along the fiber.
inline ProjectableSection make_projectable_from_total(const Prolongation& prol, const VectorField& a_total,
                                                      const VectorField& z, std::size_t samples = 16,
                                                      std::uint64_t seed = 0x9e37) {
  const Box total = prol.total();
  if (!(a_total.domain() == total)) throw ShapeError("make_projectable: a must live over the total box");
  const std::size_t m = prol.base_dim();
  const std::size_t e = prol.fiber_dim();
  for (const auto& p : sample_points(total, samples, seed)) {
    for (std::size_t k = 0; k < e; ++k) {
      auto d = directional(a_total, p, basis<double>(m + e, m + k));
      if (max_abs(d) > 1e-12) {
        throw ValidationError("make_projectable: a depends on fiber coordinate " + std::to_string(k + 1) + " at " +
                              format_point(p));
      }
    }
  }
  Vec<double> fiber_center(e);
  for (std::size_t k = 0; k < e; ++k) fiber_center[k] = 0.5 * (prol.fibration().fiber[k].lo + prol.fibration().fiber[k].hi);
  Section a(prol.fibration().base, [a_total, fiber_center](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    return a_total(concat(x, embed_all<S>(fiber_center)));
  });
  return ProjectableSection(prol, a, z);
}

inline ProjectableSection vertical_lift(const Prolongation& prol, const VectorField& z) {
  return ProjectableSection(prol, constant_section(prol.algebroid(), Vec<double>(prol.alg_dim(), 0.0)), z);
}

/// Constant projectable section through (a, v = rho_x a, z = 0).
inline ProjectableSection projectable_through(const Prolongation& prol, const Vec<double>& a) {
  return ProjectableSection(prol, constant_section(prol.algebroid(), a), zero_vector_field(prol.total(), prol.fiber_dim()));
}

/// sum_i f_i X_i, with the coefficients f_i packed into one field on the total box.
class ModuleSection {
 public:
  ModuleSection(VectorField coefficients, std::vector<ProjectableSection> generators)
      : coefficients_(std::move(coefficients)), generators_(std::move(generators)) {
    if (generators_.empty()) throw ShapeError("module section: needs at least one term");
    const Box& total = generators_.front().section().domain();
    for (const auto& g : generators_)
      if (!(g.section().domain() == total)) throw ShapeError("module section: generators over different boxes");
    if (!(coefficients_.domain() == total)) throw ShapeError("module section: coefficients over a different box");
    const std::size_t k = generators_.size();
    assembled_ = Section(total, [c = coefficients_, gens = generators_, k](const auto& p) {
      using S = typename std::decay_t<decltype(p)>::value_type;
      auto cp = c(p);
      require_same_size(cp.size(), k, "module section coefficients");
      Vec<S> r = cp[0] * gens[0].section()(p);
      for (std::size_t i = 1; i < k; ++i) r = r + cp[i] * gens[i].section()(p);
      return r;
    });
  }

  /// From explicit terms (f_i, X_i).
  explicit ModuleSection(const std::vector<std::pair<ScalarField, ProjectableSection>>& terms)
      : ModuleSection(pack(terms), generators_of(terms)) {}

  /// The single term 1 · X.
  explicit ModuleSection(const ProjectableSection& x)
      : ModuleSection(constant<Vec>(x.section().domain(), Vec<double>{1.0}), {x}) {}

  const VectorField& coefficients() const { return coefficients_; }
  const std::vector<ProjectableSection>& generators() const { return generators_; }
  std::size_t size() const { return generators_.size(); }
  const Section& section() const { return assembled_; }

 private:
  static VectorField pack(const std::vector<std::pair<ScalarField, ProjectableSection>>& terms) {
    if (terms.empty()) throw ShapeError("module section: needs at least one term");
    std::vector<ScalarField> fs;
    for (const auto& t : terms) fs.push_back(t.first);
    return VectorField(terms.front().second.section().domain(), [fs](const auto& p) {
      using S = typename std::decay_t<decltype(p)>::value_type;
      Vec<S> r;
      r.reserve(fs.size());
      for (const auto& f : fs) r.push_back(f(p));
      return r;
    });
  }
  static std::vector<ProjectableSection> generators_of(
      const std::vector<std::pair<ScalarField, ProjectableSection>>& terms) {
    std::vector<ProjectableSection> g;
    for (const auto& t : terms) g.push_back(t.second);
    return g;
  }

  VectorField coefficients_;
  std::vector<ProjectableSection> generators_;
  Section assembled_;
};

/// Decomposition of an arbitrary section over the constant frame (e_k, 0), (0, e_j).
inline ModuleSection decompose(const Prolongation& prol, const Section& s) {
  if (!(s.domain() == prol.total())) throw ShapeError("decompose: section over a different box");
  const std::size_t n = prol.alg_dim();
  const std::size_t e = prol.fiber_dim();
  std::vector<ProjectableSection> frame;
  for (std::size_t k = 0; k < n; ++k) {
    frame.emplace_back(prol, constant_section(prol.algebroid(), basis<double>(n, k)),
                       zero_vector_field(prol.total(), e));
  }
  for (std::size_t j = 0; j < e; ++j) frame.push_back(vertical_lift(prol, constant<Vec>(prol.total(), basis<double>(e, j))));
  return ModuleSection(s, std::move(frame));
}

// ---------------------------------------------------------------------------
// Brackets.

/// hat-rho of an assembled prolongation section: (rho_x a, z), a vector field on the total box.
inline VectorField hat_anchored(const Prolongation& prol, const Section& s) {
  return VectorField(prol.total(), [rho = prol.hat_anchor(), s](const auto& p) { return rho(p) * s(p); });
}

/// ([a, a']_A, last e components of [(rho a, z), (rho a', z')]).
inline ProjectableSection projectable_bracket(const Prolongation& prol, const ProjectableSection& x,
                                              const ProjectableSection& y) {
  const std::size_t m = prol.base_dim();
  const std::size_t e = prol.fiber_dim();
  auto base_part = prol.algebroid().bracket(x.a(), y.a());
  auto vx = hat_anchored(prol, x.section());
  auto vy = hat_anchored(prol, y.section());
  auto vb = vector_field_bracket(vx, vy);
  VectorField z(prol.total(), [vb, m, e](const auto& p) { return slice(vb(p), m, e); });
  return ProjectableSection(prol, base_part, z);
}

/// [sum f_i X_i, sum g_j Y_j]
///   = sum f_i g_j [X_i, Y_j] + sum_j hatrho(X)(g_j) Y_j - sum_i hatrho(Y)(f_i) X_i.
inline ModuleSection prolong_bracket(const Prolongation& prol, const ModuleSection& x, const ModuleSection& y) {
  const Box total = prol.total();
  if (!(x.section().domain() == total) || !(y.section().domain() == total)) {
    throw ShapeError("prolong_bracket: sections over a different prolongation");
  }
  const std::size_t k = x.size();
  const std::size_t l = y.size();
  std::vector<ProjectableSection> gens;
  gens.reserve(k * l + k + l);
  for (const auto& xi : x.generators())
    for (const auto& yj : y.generators()) gens.push_back(projectable_bracket(prol, xi, yj));
  for (const auto& yj : y.generators()) gens.push_back(yj);
  for (const auto& xi : x.generators()) gens.push_back(xi);
  auto rx = hat_anchored(prol, x.section());
  auto ry = hat_anchored(prol, y.section());
  VectorField coeffs(total, [f = x.coefficients(), g = y.coefficients(), rx, ry, k, l](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    auto fp = f(p);
    auto gp = g(p);
    auto dg = directional_at(g, p, rx(p));
    auto df = directional_at(f, p, ry(p));
    Vec<S> c;
    c.reserve(k * l + k + l);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < l; ++j) c.push_back(fp[i] * gp[j]);
    for (std::size_t j = 0; j < l; ++j) c.push_back(dg[j]);
    for (std::size_t i = 0; i < k; ++i) c.push_back(-df[i]);
    return c;
  });
  return ModuleSection(coeffs, std::move(gens));
}

/// The derived bracket context with its bracket routed through module decompositions.
inline BracketContext context_of(const Prolongation& prol) {
  BracketContext ctx = prol.derived().context();
  ctx.bracket = [prol](const Section& a, const Section& b) {
    return prolong_bracket(prol, decompose(prol, a), decompose(prol, b)).section();
  };
  return ctx;
}

// ---------------------------------------------------------------------------
// Defects.

/// hatrho([X, X']) - [hatrho X, hatrho X'] at p.
inline Vec<double> hat_anchor_morphism_defect(const Prolongation& prol, const ModuleSection& x,
                                              const ModuleSection& y, const Vec<double>& at) {
  require_interior(prol.total(), at, "hat_anchor_morphism_defect");
  auto lhs = prol.hat_anchor()(at) * prolong_bracket(prol, x, y).section()(at);
  auto rhs = vector_field_bracket(hat_anchored(prol, x.section()), hat_anchored(prol, y.section()))(at);
  return lhs - rhs;
}

/// Module bracket minus the generic bracket of the derived algebroid, at p.
inline Vec<double> module_bracket_defect(const Prolongation& prol, const ModuleSection& x, const ModuleSection& y,
                                         const Vec<double>& at) {
  require_interior(prol.total(), at, "module_bracket_defect");
  return prolong_bracket(prol, x, y).section()(at) - prol.derived().bracket(x.section(), y.section())(at);
}

inline Vec<double> module_jacobiator(const Prolongation& prol, const ModuleSection& x, const ModuleSection& y,
                                     const ModuleSection& z, const Vec<double>& at) {
  require_interior(prol.total(), at, "module_jacobiator");
  auto term = [&](const ModuleSection& a, const ModuleSection& b, const ModuleSection& c) {
    return prolong_bracket(prol, a, prolong_bracket(prol, b, c)).section()(at);
  };
  return term(x, y, z) + term(y, z, x) + term(z, x, y);
}

inline bool is_vertical(const ModuleSection& s, const Vec<double>& at, std::size_t samples = 8) {
  auto pts = sample_points(s.section().domain(), samples, 0xa11);
  pts.push_back(at);
  for (const auto& g : s.generators()) {
    const std::size_t m = g.a().dim();
    for (const auto& p : pts)
      if (max_abs(g.a()(slice(p, 0, m))) != 0.0) return false;
  }
  return true;
}

struct VerticalDefect {
  Vec<double> difference;   // bracket with C minus bracket with C = 0
  Vec<double> a_component;  // algebroid part of the bracket
  double max() const { return std::max(max_abs(difference), max_abs(a_component)); }
};

inline VerticalDefect vertical_independence_defect(const Prolongation& prol, const ModuleSection& z1,
                                                   const ModuleSection& z2, const Vec<double>& at) {
  require_interior(prol.total(), at, "vertical_independence_defect");
  if (!is_vertical(z1, at) || !is_vertical(z2, at)) {
    throw PreconditionError("vertical_independence_defect: inputs must be vertical");
  }
  const auto& alg = prol.algebroid();
  auto flat = alg.with_structure(
      constant<Bilinear>(alg.base(), Bilinear<double>(alg.fiber_dim(), alg.fiber_dim(), alg.fiber_dim())),
      alg.name() + "/flat", true);
  Prolongation flat_prol(flat, prol.fibration());
  auto with_c = prolong_bracket(prol, z1, z2).section()(at);
  auto without_c = prolong_bracket(flat_prol, z1, z2).section()(at);
  return {with_c - without_c, slice(with_c, 0, prol.alg_dim())};
}

/// Rank data for the hat anchor and its base projection T p ∘ hatrho.
struct KernelIdentity {
  std::size_t base_nullity = 0;       // nullity of rho_x
  std::size_t hat_nullity = 0;        // nullity of hatrho_(x,e)
  std::size_t projected_nullity = 0;  // nullity of T p ∘ hatrho_(x,e) = [rho_x 0]
  std::size_t fiber_dim = 0;
  bool near_cutoff = false;

  /// nullity(hatrho) = nullity(rho) + e.
  bool literal_holds() const { return hat_nullity == base_nullity + fiber_dim; }
  /// nullity(T p ∘ hatrho) = nullity(rho) + e.
  bool projected_holds() const { return projected_nullity == base_nullity + fiber_dim; }
  /// hatrho is injective on the vertical block, so its kernel is ker(rho) × 0.
  bool hat_equals_base() const { return hat_nullity == base_nullity; }
};

inline KernelIdentity kernel_identity(const Prolongation& prol, const Vec<double>& at, double rel_cutoff = 1e-10) {
  require_interior(prol.total(), at, "kernel_identity");
  const std::size_t m = prol.base_dim();
  auto base = kernel_diagnostics(prol.algebroid().anchor()(slice(at, 0, m)), rel_cutoff);
  auto hat_mat = prol.hat_anchor()(at);
  auto hat = kernel_diagnostics(hat_mat, rel_cutoff);
  Mat<double> proj(m, hat_mat.cols);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < hat_mat.cols; ++j) proj(i, j) = hat_mat(i, j);
  auto projected = kernel_diagnostics(proj, rel_cutoff);
  return {base.nullity, hat.nullity, projected.nullity, prol.fiber_dim(),
          base.near_cutoff || hat.near_cutoff || projected.near_cutoff};
}

// ---------------------------------------------------------------------------
// Lifted morphisms.

struct LiftedMorphism {
  BundleMorphism map;   // over Psi, fiber map (a, z) -> (Phi a, [T Psi (rho a, z)]_fiber)
  double lm1 = 0.0;     // max anchor-compatibility defect in the derived contexts over samples
  Vec<double> worst;    // sample attaining lm1
};

/// T Psi (m, a, mu) = (Psi(m), Phi(a), T Psi(mu)) in trivialized form.
inline LiftedMorphism prolong_morphism(const Prolongation& src, const Prolongation& dst, const BundleMorphism& phi,
                                       const VectorField& psi_total, std::size_t samples = kDefaultSamples,
                                       std::uint64_t seed = 1) {
  if (!(phi.source() == src.algebroid().base()) || !(phi.target == dst.algebroid().base())) {
    throw ShapeError("prolong_morphism: algebroid morphism does not match the prolongations");
  }
  if (!(psi_total.domain() == src.total())) throw ShapeError("prolong_morphism: Psi must live over the source total box");
  const std::size_t m1 = src.base_dim();
  const std::size_t m2 = dst.base_dim();
  const std::size_t e2 = dst.fiber_dim();
  const std::size_t n1 = src.alg_dim();
  const std::size_t n2 = dst.alg_dim();
  auto pts = sample_points(src.total(), samples, seed);
  for (const auto& p : pts) {
    auto image = psi_total(p);
    require_same_size(image.size(), m2 + e2, "prolong_morphism: Psi output");
    auto lower = phi.base_map(slice(p, 0, m1));
    auto gap = max_abs(slice(image, 0, m2) - lower);
    if (gap > 1e-12 * (1.0 + max_abs(lower))) {
      throw ValidationError("prolong_morphism: Psi does not cover psi at " + format_point(p) + " (gap " +
                            std::to_string(gap) + ")");
    }
  }
  MatrixField fiber(src.total(), [phi, psi_total, rho = src.algebroid().anchor(), m1, m2, e2, n1, n2,
                                  e1 = src.fiber_dim()](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    auto x = slice(p, 0, m1);
    auto f = phi.fiber_map(x);
    auto jac = jacobian_at(psi_total, p);
    auto r = rho(x);
    Mat<S> out(n2 + e2, n1 + e1);
    for (std::size_t i = 0; i < n2; ++i)
      for (std::size_t j = 0; j < n1; ++j) out(i, j) = f(i, j);
    for (std::size_t k = 0; k < e2; ++k) {
      for (std::size_t j = 0; j < n1; ++j) {
        S acc(0.0);
        for (std::size_t q = 0; q < m1; ++q) acc += jac(m2 + k, q) * r(q, j);
        out(n2 + k, j) = acc;
      }
      for (std::size_t j = 0; j < e1; ++j) out(n2 + k, n1 + j) = jac(m2 + k, m1 + j);
    }
    return out;
  });
  LiftedMorphism lifted{BundleMorphism{psi_total, fiber, dst.total()}, 0.0, {}};
  for (const auto& p : pts) {
    auto q = lifted.map.image_of(p);
    auto defect = max_abs(dst.hat_anchor()(q) * fiber(p) - jacobian(psi_total, p) * src.hat_anchor()(p));
    if (defect > lifted.lm1 || lifted.worst.empty()) {
      lifted.lm1 = std::max(lifted.lm1, defect);
      lifted.worst = p;
    }
  }
  return lifted;
}

}  // namespace lalg
