#pragma once

// Finite projective and direct sequences of prolongations with bonding maps.
// A projective tower maps level j down to level i < j; a direct tower maps
// level i up to level j > i. Every statement about the limit is checked as a
// per-level compatibility statement on sampled points.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lalg/algebroid.hpp"
#include "lalg/error.hpp"
#include "lalg/field.hpp"
#include "lalg/linalg.hpp"
#include "lalg/prolong.hpp"
#include "lalg/sampling.hpp"

namespace lalg {

enum class TowerKind { projective, direct };

inline std::string to_string(TowerKind k) { return k == TowerKind::projective ? "projective" : "direct"; }

/// Bonding between levels lo < hi. Maps run hi -> lo (projective) or lo -> hi (direct).
struct BondingTriple {
  std::size_t lo = 0;
  std::size_t hi = 0;
  VectorField base_map;      // source base -> target base
  MatrixField alg_map;       // over the source base, n_target x n_source
  MatrixField fib_map;       // over the source base, e_target x e_source
  VectorField base_section;  // optional: target base -> source base with base_map ∘ base_section = id
  VectorField total_map;     // optional: explicit source total -> target total; default (x, e) -> (δx, ξ(x)e)
};

struct CheckResult {
  std::string check;
  double defect = 0.0;
  double tolerance = 0.0;
  std::string where;
  Vec<double> point;
  bool pass() const { return defect <= tolerance; }
};

namespace detail {

inline void record(CheckResult& r, double defect, const std::string& where, const Vec<double>& point) {
  if (r.where.empty() || defect > r.defect) {
    r.defect = defect;
    r.where = where;
    r.point = point;
  }
}

inline std::string levels_label(std::size_t i, std::size_t j) {
  return "levels (" + std::to_string(i) + "," + std::to_string(j) + ")";
}

inline Vec<double> center_of(const Box& b) {
  Vec<double> c(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i) c[i] = 0.5 * (b[i].lo + b[i].hi);
  return c;
}

}  // namespace detail

class Tower {
 public:
  /// `bondings` must contain every consecutive pair (k, k+1); any other pair is an explicit composite.
  Tower(TowerKind kind, std::vector<Prolongation> levels, std::vector<BondingTriple> bondings)
      : kind_(kind), levels_(std::move(levels)) {
    if (levels_.size() < 2) throw ValidationError("tower: needs at least two levels");
    for (auto& b : bondings) {
      if (b.lo >= b.hi || b.hi >= levels_.size()) {
        throw ValidationError("tower: bonding " + detail::levels_label(b.lo, b.hi) + " out of range");
      }
      auto key = std::make_pair(b.lo, b.hi);
      if (bondings_.count(key)) throw ValidationError("tower: duplicate bonding " + detail::levels_label(b.lo, b.hi));
      validate(b);
      if (b.total_map.empty()) b.total_map = default_total_map(b);
      bondings_.emplace(key, std::move(b));
    }
    for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
      if (!bondings_.count({k, k + 1})) throw ValidationError("tower: missing bonding " + detail::levels_label(k, k + 1));
    }
  }

  TowerKind kind() const { return kind_; }
  std::size_t size() const { return levels_.size(); }
  const Prolongation& level(std::size_t k) const { return levels_.at(k); }
  const std::vector<Prolongation>& levels() const { return levels_; }

  std::size_t source_of(std::size_t lo, std::size_t hi) const { return kind_ == TowerKind::projective ? hi : lo; }
  std::size_t target_of(std::size_t lo, std::size_t hi) const { return kind_ == TowerKind::projective ? lo : hi; }

  const BondingTriple& consecutive(std::size_t k) const { return bondings_.at({k, k + 1}); }

  /// Explicit bonding when one was given, otherwise the composite of the consecutive chain.
  BondingTriple bonding(std::size_t lo, std::size_t hi) const {
    auto it = bondings_.find({lo, hi});
    if (it != bondings_.end()) return it->second;
    return chain(lo, hi);
  }

  bool has_explicit(std::size_t lo, std::size_t hi) const { return bondings_.count({lo, hi}) > 0; }

  /// Composite of consecutive bondings only.
  BondingTriple chain(std::size_t lo, std::size_t hi) const {
    if (lo >= hi || hi >= size()) throw ValidationError("tower: bad level pair " + detail::levels_label(lo, hi));
    BondingTriple acc = consecutive(lo);
    for (std::size_t k = lo + 1; k < hi; ++k) {
      const auto& next = consecutive(k);
      acc = kind_ == TowerKind::projective ? compose(acc, next) : compose(next, acc);
      acc.lo = lo;
      acc.hi = k + 1;
    }
    return acc;
  }

  /// outer ∘ inner, where inner's target level is outer's source level.
  static BondingTriple compose(const BondingTriple& outer, const BondingTriple& inner) {
    BondingTriple r;
    r.lo = std::min(outer.lo, inner.lo);
    r.hi = std::max(outer.hi, inner.hi);
    r.base_map = lalg::compose(outer.base_map, inner.base_map);
    r.alg_map = MatrixField(inner.alg_map.domain(), [o = outer.alg_map, i = inner.alg_map, d = inner.base_map](
                                                        const auto& x) { return o(d(x)) * i(x); });
    r.fib_map = MatrixField(inner.fib_map.domain(), [o = outer.fib_map, i = inner.fib_map, d = inner.base_map](
                                                        const auto& x) { return o(d(x)) * i(x); });
    if (!outer.base_section.empty() && !inner.base_section.empty()) {
      r.base_section = lalg::compose(inner.base_section, outer.base_section);
    }
    r.total_map = lalg::compose(outer.total_map, inner.total_map);
    return r;
  }

 private:
  void validate(const BondingTriple& b) const {
    const auto& src = levels_[source_of(b.lo, b.hi)];
    const auto& tgt = levels_[target_of(b.lo, b.hi)];
    const std::string label = detail::levels_label(b.lo, b.hi);
    const Box& sb = src.fibration().base;
    if (b.base_map.empty() || b.alg_map.empty() || b.fib_map.empty()) throw ValidationError("tower: incomplete bonding " + label);
    if (!(b.base_map.domain() == sb) || !(b.alg_map.domain() == sb) || !(b.fib_map.domain() == sb)) {
      throw ShapeError("tower: bonding " + label + " must be defined over the source base box");
    }
    auto c = detail::center_of(sb);
    if (b.base_map(c).size() != tgt.base_dim()) throw ShapeError("tower: base map of " + label + " has the wrong output size");
    auto z = b.alg_map(c);
    if (z.rows != tgt.alg_dim() || z.cols != src.alg_dim()) throw ShapeError("tower: algebroid map of " + label + " has the wrong shape");
    auto x = b.fib_map(c);
    if (x.rows != tgt.fiber_dim() || x.cols != src.fiber_dim()) throw ShapeError("tower: fiber map of " + label + " has the wrong shape");
    if (!b.base_section.empty()) {
      if (!(b.base_section.domain() == tgt.fibration().base)) throw ShapeError("tower: base section of " + label + " over the wrong box");
    }
    if (!b.total_map.empty()) {
      if (!(b.total_map.domain() == src.total())) throw ShapeError("tower: total map of " + label + " over the wrong box");
      if (b.total_map(detail::center_of(src.total())).size() != tgt.total().dim()) {
        throw ShapeError("tower: total map of " + label + " has the wrong output size");
      }
    }
  }

  VectorField default_total_map(const BondingTriple& b) const {
    const auto& src = levels_[source_of(b.lo, b.hi)];
    const std::size_t m = src.base_dim();
    const std::size_t e = src.fiber_dim();
    return VectorField(src.total(), [d = b.base_map, xi = b.fib_map, m, e](const auto& p) {
      auto x = slice(p, 0, m);
      return concat(d(x), xi(x) * slice(p, m, e));
    });
  }

  TowerKind kind_;
  std::vector<Prolongation> levels_;
  std::map<std::pair<std::size_t, std::size_t>, BondingTriple> bondings_;
};

/// Bonding with affine base map x -> T x + t and constant fiber maps; the base
/// section is the pseudo-inverse y -> T^+ (y - t).
inline BondingTriple linear_bonding(std::size_t lo, std::size_t hi, const Box& source_base, const Box& target_base,
                                    const Mat<double>& t, const Mat<double>& alg, const Mat<double>& fib,
                                    const Vec<double>& offset = {}) {
  Vec<double> off = offset.empty() ? Vec<double>(t.rows, 0.0) : offset;
  auto pinv = pseudo_inverse(t);
  BondingTriple b;
  b.lo = lo;
  b.hi = hi;
  b.base_map = affine_map(source_base, t, off);
  b.alg_map = constant<Mat>(source_base, alg);
  b.fib_map = constant<Mat>(source_base, fib);
  b.base_section = affine_map(target_base, pinv, -1.0 * (pinv * off));
  return b;
}

// ---------------------------------------------------------------------------
// Checks.

/// Composite law B(i,k) = B(i,j) ∘ B(j,k) (projective) or B(j,k) ∘ B(i,j) (direct) for all i < j < k.
inline CheckResult check_bonding_laws(const Tower& tower, std::size_t samples = kDefaultSamples,
                                      std::uint64_t seed = 1, double tol = 1e-10) {
  CheckResult r{"bonding-laws", 0.0, tol, {}, {}};
  const std::size_t n = tower.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        auto direct = tower.bonding(i, k);
        auto ij = tower.bonding(i, j);
        auto jk = tower.bonding(j, k);
        auto via = tower.kind() == TowerKind::projective ? Tower::compose(ij, jk) : Tower::compose(jk, ij);
        const auto& src = tower.level(tower.source_of(i, k));
        const std::string where = "levels (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")";
        for (const auto& x : sample_points(src.fibration().base, samples, seed)) {
          double d = std::max({max_abs(direct.base_map(x) - via.base_map(x)), max_abs(direct.alg_map(x) - via.alg_map(x)),
                               max_abs(direct.fib_map(x) - via.fib_map(x))});
          detail::record(r, d, where, x);
        }
        for (const auto& p : sample_points(src.total(), samples, seed)) {
          detail::record(r, max_abs(direct.total_map(p) - via.total_map(p)), where, p);
        }
      }
  return r;
}

/// Anchor square rho_t(δx) ζ(x) = Tδ_x rho_s(x), and bracket compatibility on related pairs.
inline std::vector<CheckResult> check_anchored_sequence(const Tower& tower, std::size_t samples = kDefaultSamples,
                                                        std::uint64_t seed = 1, double tol = 1e-8);

/// Fiber containment ξ(M_source) ⊂ M_target and, for projective towers, the projection square p_t ∘ Ψ = δ ∘ p_s.
inline std::vector<CheckResult> check_prolong_compat(const Tower& tower, std::size_t samples = kDefaultSamples,
                                                     std::uint64_t seed = 1, double tol = 1e-10) {
  CheckResult contain{"prolong-compat/containment", 0.0, tol, {}, {}};
  CheckResult square{"prolong-compat/square", 0.0, tol, {}, {}};
  for (std::size_t k = 0; k + 1 < tower.size(); ++k) {
    const auto& b = tower.consecutive(k);
    const auto& src = tower.level(tower.source_of(k, k + 1));
    const auto& tgt = tower.level(tower.target_of(k, k + 1));
    const Box target_total = tgt.total();
    const std::size_t m = src.base_dim();
    const std::size_t mt = tgt.base_dim();
    const std::string where = detail::levels_label(k, k + 1);
    for (const auto& p : sample_points(src.total(), samples, seed)) {
      auto q = b.total_map(p);
      double excess = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        excess = std::max({excess, target_total[i].lo - q[i], q[i] - target_total[i].hi});
      }
      detail::record(contain, excess, where, p);
      if (tower.kind() == TowerKind::projective) {
        detail::record(square, max_abs(slice(q, 0, mt) - b.base_map(slice(p, 0, m))), where, p);
      }
    }
  }
  std::vector<CheckResult> out{contain};
  if (tower.kind() == TowerKind::projective) out.push_back(square);
  return out;
}

/// Injectivity of the bonding maps, the trivialization square and fiber-box nesting (direct towers).
inline std::vector<CheckResult> check_direct_sequence(const Tower& tower, std::size_t samples = kDefaultSamples,
                                                      std::uint64_t seed = 1, double tol = 1e-10) {
  if (tower.kind() != TowerKind::direct) throw PreconditionError("check_direct_sequence: tower is not direct");
  CheckResult inj{"direct-sequence/injectivity", 0.0, 0.0, {}, {}};
  CheckResult square{"direct-sequence/square", 0.0, tol, {}, {}};
  CheckResult nest{"direct-sequence/nesting", 0.0, tol, {}, {}};
  for (std::size_t k = 0; k + 1 < tower.size(); ++k) {
    const auto& b = tower.consecutive(k);
    const auto& src = tower.level(k);
    const auto& tgt = tower.level(k + 1);
    const std::size_t m = src.base_dim();
    const std::size_t mt = tgt.base_dim();
    const std::string where = detail::levels_label(k, k + 1);
    for (const auto& x : sample_points(src.fibration().base, samples, seed)) {
      // Rank deficit of each linear part counts as the injectivity defect.
      auto missing = [](const Mat<double>& a) {
        return static_cast<double>(a.cols - kernel_diagnostics(a).rank);
      };
      double d = std::max({missing(b.alg_map(x)), missing(b.fib_map(x)), missing(jacobian(b.base_map, x))});
      detail::record(inj, d, where, x);
    }
    for (const auto& p : sample_points(src.total(), samples, seed)) {
      detail::record(square, max_abs(slice(b.total_map(p), 0, mt) - b.base_map(slice(p, 0, m))), where, p);
    }
    // Corners of the source fiber box, mapped linearly, must land in the target fiber box.
    const Box& fs = src.fibration().fiber;
    const Box& ft = tgt.fibration().fiber;
    const std::size_t e = fs.dim();
    for (const auto& x : sample_points(src.fibration().base, std::min<std::size_t>(samples, 8), seed)) {
      auto xi = b.fib_map(x);
      for (std::size_t mask = 0; mask < (std::size_t{1} << e); ++mask) {
        Vec<double> corner(e);
        for (std::size_t i = 0; i < e; ++i) corner[i] = (mask >> i) & 1 ? fs[i].hi : fs[i].lo;
        auto y = xi * corner;
        double excess = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) excess = std::max({excess, ft[i].lo - y[i], y[i] - ft[i].hi});
        detail::record(nest, excess, where, corner);
      }
    }
  }
  return {inj, square, nest};
}

// ---------------------------------------------------------------------------
// Transport of sections along bondings.

namespace detail {

inline Mat<double> constant_value(const MatrixField& f, const char* what, std::size_t samples = 8) {
  auto c = f(center_of(f.domain()));
  for (const auto& x : sample_points(f.domain(), samples, 0xc0)) {
    if (max_abs(f(x) - c) != 0.0) throw PreconditionError(std::string(what) + ": bonding map must be constant");
  }
  return c;
}

}  // namespace detail

/// Lift of the bonding k to the prolongations, with its derived-context anchor defect.
inline LiftedMorphism lifted_bonding(const Tower& tower, std::size_t k, std::size_t samples = 16) {
  const auto& b = tower.consecutive(k);
  const auto& src = tower.level(tower.source_of(k, k + 1));
  const auto& tgt = tower.level(tower.target_of(k, k + 1));
  BundleMorphism phi{b.base_map, b.alg_map, tgt.fibration().base};
  return prolong_morphism(src, tgt, phi, b.total_map, samples);
}

/// Image of a source ModuleSection on the target level: X_t(q) = M(s q) X_s(s q), with s the base section
/// extended by the pseudo-inverse of the (constant) fiber map.
inline ModuleSection bonded_image(const Tower& tower, std::size_t k, const ModuleSection& xs) {
  const auto& b = tower.consecutive(k);
  if (b.base_section.empty()) throw PreconditionError("bonded_image: bonding has no base section");
  const auto& tgt = tower.level(tower.target_of(k, k + 1));
  const std::size_t mt = tgt.base_dim();
  const std::size_t et = tgt.fiber_dim();
  const std::size_t nt = tgt.alg_dim();
  auto xi_pinv = pseudo_inverse(detail::constant_value(b.fib_map, "bonded_image"));
  auto lift = lifted_bonding(tower, k);
  VectorField s_total(tgt.total(), [s = b.base_section, xi_pinv, mt, et](const auto& q) {
    using S = typename std::decay_t<decltype(q)>::value_type;
    return concat(s(slice(q, 0, mt)), embed_all<S>(xi_pinv) * slice(q, mt, et));
  });
  std::vector<ProjectableSection> gens;
  for (const auto& g : xs.generators()) {
    Section a(tgt.fibration().base, [zeta = b.alg_map, s = b.base_section, ga = g.a()](const auto& y) {
      auto x = s(y);
      return zeta(x) * ga(x);
    });
    VectorField z(tgt.total(), [m = lift.map.fiber_map, s_total, gs = g.section(), nt, et](const auto& q) {
      auto p = s_total(q);
      return slice(m(p) * gs(p), nt, et);
    });
    gens.emplace_back(tgt, a, z);
  }
  VectorField coeffs(tgt.total(), [c = xs.coefficients(), s_total](const auto& q) { return c(s_total(q)); });
  return ModuleSection(coeffs, std::move(gens));
}

/// A source ModuleSection related to a target one: a_s = ζ^+ (a_t ∘ δ) + (I - ζ^+ ζ) ka, z_s likewise with ξ,
/// coefficients pulled back along Ψ. Needs constant ζ and ξ with ζ, ξ surjective.
inline ModuleSection related_preimage(const Tower& tower, std::size_t k, const ModuleSection& xt,
                                      const std::vector<std::pair<Section, VectorField>>& kernel_parts = {}) {
  const auto& b = tower.consecutive(k);
  const auto& src = tower.level(tower.source_of(k, k + 1));
  const std::size_t es = src.fiber_dim();
  auto zeta = detail::constant_value(b.alg_map, "related_preimage");
  auto xi = detail::constant_value(b.fib_map, "related_preimage");
  auto zp = pseudo_inverse(zeta);
  auto xp = pseudo_inverse(xi);
  auto zk = Mat<double>::identity(zeta.cols) - zp * zeta;
  auto xk = Mat<double>::identity(xi.cols) - xp * xi;
  if (!kernel_parts.empty() && kernel_parts.size() != xt.size()) {
    throw ShapeError("related_preimage: one kernel part per generator expected");
  }
  std::vector<ProjectableSection> gens;
  for (std::size_t i = 0; i < xt.size(); ++i) {
    const auto& g = xt.generators()[i];
    Section ka = kernel_parts.empty() ? zero_vector_field(src.fibration().base, src.alg_dim()) : kernel_parts[i].first;
    VectorField kz = kernel_parts.empty() ? zero_vector_field(src.total(), es) : kernel_parts[i].second;
    Section a(src.fibration().base, [d = b.base_map, ga = g.a(), zp, zk, ka](const auto& x) {
      using S = typename std::decay_t<decltype(x)>::value_type;
      return embed_all<S>(zp) * ga(d(x)) + embed_all<S>(zk) * ka(x);
    });
    // z_t ∘ Ψ = ξ z_s needs the lifted map's fiber-base block to vanish, which holds for constant ξ.
    VectorField z(src.total(), [psi = b.total_map, gz = g.z(), xp, xk, kz](const auto& p) {
      using S = typename std::decay_t<decltype(p)>::value_type;
      return embed_all<S>(xp) * gz(psi(p)) + embed_all<S>(xk) * kz(p);
    });
    gens.emplace_back(src, a, z);
  }
  VectorField coeffs(src.total(), [c = xt.coefficients(), psi = b.total_map](const auto& p) { return c(psi(p)); });
  return ModuleSection(coeffs, std::move(gens));
}

struct LimitBracketDefect {
  double rs = 0.0;       // relatedness: max |M X_s(p) - X_t(Ψ p)| over both inputs
  Vec<double> bracket;   // M [X_s, X'_s](p) - [X_t, X'_t](Ψ p)
  double bracket_max() const { return max_abs(bracket); }
};

/// Bracket compatibility of the lifted bonding k at a source point p, with X_t the bonded images.
inline LimitBracketDefect limit_bracket_defect(const Tower& tower, std::size_t k, const ModuleSection& xs,
                                               const ModuleSection& ys, const Vec<double>& at) {
  const auto& src = tower.level(tower.source_of(k, k + 1));
  const auto& tgt = tower.level(tower.target_of(k, k + 1));
  require_interior(src.total(), at, "limit_bracket_defect");
  if (!(xs.section().domain() == src.total()) || !(ys.section().domain() == src.total())) {
    throw ShapeError("limit_bracket_defect: sections must live on the source level");
  }
  auto lift = lifted_bonding(tower, k);
  auto q = lift.map.image_of(at);
  auto xt = bonded_image(tower, k, xs);
  auto yt = bonded_image(tower, k, ys);
  auto m = lift.map.fiber_map(at);
  LimitBracketDefect d;
  d.rs = std::max(max_abs(m * xs.section()(at) - xt.section()(q)), max_abs(m * ys.section()(at) - yt.section()(q)));
  d.bracket = m * prolong_bracket(src, xs, ys).section()(at) - prolong_bracket(tgt, xt, yt).section()(q);
  return d;
}

inline std::vector<CheckResult> check_anchored_sequence(const Tower& tower, std::size_t samples, std::uint64_t seed,
                                                        double tol) {
  CheckResult anchor{"anchored-sequence/anchor", 0.0, tol, {}, {}};
  CheckResult brk{"anchored-sequence/bracket", 0.0, tol, {}, {}};
  Rng rng(seed);
  for (std::size_t k = 0; k + 1 < tower.size(); ++k) {
    const auto& b = tower.consecutive(k);
    const auto& src = tower.level(tower.source_of(k, k + 1)).algebroid();
    const auto& tgt = tower.level(tower.target_of(k, k + 1)).algebroid();
    BundleMorphism phi{b.base_map, b.alg_map, tgt.base()};
    const std::string where = detail::levels_label(k, k + 1);
    // Related constant pairs (e_i, e_j) -> (ζ e_i, ζ e_j); ζ may vary, then only the anchor square is meaningful.
    for (const auto& x : sample_points(src.base(), samples, seed)) {
      auto y = b.base_map(x);
      if (!tgt.base().interior(y)) {
        detail::record(anchor, std::numeric_limits<double>::infinity(), where + ": base map leaves the target box", x);
        continue;
      }
      detail::record(anchor, max_abs(tgt.anchor()(y) * b.alg_map(x) - jacobian(b.base_map, x) * src.anchor()(x)), where, x);
    }
    Mat<double> zeta;
    try {
      zeta = detail::constant_value(b.alg_map, "anchored-sequence");
    } catch (const PreconditionError&) {
      continue;  // bracket check needs related pairs, available for constant ζ only
    }
    for (const auto& x : sample_points(src.base(), std::min<std::size_t>(samples, 16), seed)) {
      auto y = b.base_map(x);
      if (!tgt.base().interior(y)) continue;
      auto u = rng.vector(src.fiber_dim());
      auto v = rng.vector(src.fiber_dim());
      auto su = constant_section(src, u), sv = constant_section(src, v);
      auto tu = constant_section(tgt, zeta * u), tv = constant_section(tgt, zeta * v);
      auto d = lie_morphism_defect(src, tgt, phi, {su, sv}, {tu, tv}, x);
      detail::record(brk, d.lm2_max(), where, x);
    }
  }
  return {anchor, brk};
}

/// Runs every structural check that applies to the tower's kind, in a fixed order.
inline std::vector<CheckResult> check_tower(const Tower& tower, std::size_t samples = kDefaultSamples,
                                            std::uint64_t seed = 1) {
  std::vector<CheckResult> out{check_bonding_laws(tower, samples, seed)};
  for (auto& r : check_anchored_sequence(tower, samples, seed)) out.push_back(std::move(r));
  for (auto& r : check_prolong_compat(tower, samples, seed)) out.push_back(std::move(r));
  if (tower.kind() == TowerKind::direct) {
    for (auto& r : check_direct_sequence(tower, samples, seed)) out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Threads and Jacobian compatibility.

using LimitThread = std::vector<Vec<double>>;

/// Maps a point down (projective, from the top level) or up (direct, from level 0).
inline LimitThread make_thread(const Tower& tower, const Vec<double>& start) {
  const std::size_t n = tower.size();
  LimitThread t(n);
  if (tower.kind() == TowerKind::projective) {
    t[n - 1] = start;
    for (std::size_t k = n - 1; k-- > 0;) t[k] = tower.consecutive(k).base_map(t[k + 1]);
  } else {
    t[0] = start;
    for (std::size_t k = 0; k + 1 < n; ++k) t[k + 1] = tower.consecutive(k).base_map(t[k]);
  }
  return t;
}

inline double thread_defect(const Tower& tower, const LimitThread& thread) {
  if (thread.size() != tower.size()) throw ShapeError("thread_defect: thread length differs from the tower height");
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < tower.size(); ++k) {
    const std::size_t s = tower.source_of(k, k + 1);
    const std::size_t t = tower.target_of(k, k + 1);
    worst = std::max(worst, max_abs(tower.consecutive(k).base_map(thread[s]) - thread[t]));
  }
  return worst;
}

struct JacobianCompat {
  CheckResult coherence{"jacobian/coherence", 0.0, 1e-10, {}, {}};  // γ ∘ f_s - f_t ∘ δ
  CheckResult jacobian{"jacobian/derivative", 0.0, 1e-8, {}, {}};   // γ Df_s - Df_t(δ) Dδ
  bool pass() const { return coherence.pass() && jacobian.pass(); }
};

/// Per-level maps f_k with linear codomain bondings γ_k (one per consecutive pair, tower direction).
inline JacobianCompat limit_jacobian_compat(const Tower& tower, const std::vector<VectorField>& maps,
                                            const std::vector<Mat<double>>& gammas, const LimitThread& thread,
                                            std::size_t samples = 16, std::uint64_t seed = 1) {
  if (maps.size() != tower.size()) throw ShapeError("limit_jacobian_compat: one map per level expected");
  if (gammas.size() + 1 != tower.size()) throw ShapeError("limit_jacobian_compat: one codomain bonding per pair expected");
  if (thread.size() != tower.size()) throw ShapeError("limit_jacobian_compat: thread length differs from the tower height");
  JacobianCompat r;
  for (std::size_t k = 0; k + 1 < tower.size(); ++k) {
    const std::size_t s = tower.source_of(k, k + 1);
    const std::size_t t = tower.target_of(k, k + 1);
    if (!(maps[s].domain() == tower.level(s).fibration().base)) throw ShapeError("limit_jacobian_compat: map over the wrong box");
    const auto& d = tower.consecutive(k).base_map;
    const std::string where = detail::levels_label(k, k + 1);
    auto pts = sample_points(tower.level(s).fibration().base, samples, seed);
    pts.push_back(thread[s]);
    for (const auto& x : pts) {
      auto y = d(x);
      detail::record(r.coherence, max_abs(gammas[k] * maps[s](x) - maps[t](y)), where, x);
    }
    if (!r.coherence.pass()) continue;
    for (const auto& x : pts) {
      auto y = d(x);
      detail::record(r.jacobian, max_abs(gammas[k] * jacobian(maps[s], x) - jacobian(maps[t], y) * jacobian(d, x)),
                     where, x);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Builtin towers.

/// Selector matrix picking coordinates [0, rows) out of R^cols (projection) or its transpose (inclusion).
inline Mat<double> coordinate_projection(std::size_t rows, std::size_t cols) {
  Mat<double> p(rows, cols);
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) p(i, i) = 1.0;
  return p;
}

/// Tangent algebroids over [-1,1]^d_k with M = TM, bonded by coordinate projections (projective)
/// or coordinate inclusions (direct).
inline Tower make_coordinate_tower(TowerKind kind, const std::vector<std::size_t>& dims) {
  std::vector<Prolongation> levels;
  for (auto d : dims) levels.push_back(prolong_over_self(make_tangent(Box::cube(d))));
  std::vector<BondingTriple> bonds;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const std::size_t lo = dims[k], hi = dims[k + 1];
    if (lo > hi) throw ValidationError("coordinate tower: level dimensions must be non-decreasing");
    if (kind == TowerKind::projective) {
      auto p = coordinate_projection(lo, hi);
      bonds.push_back(linear_bonding(k, k + 1, Box::cube(hi), Box::cube(lo), p, p, p));
    } else {
      auto p = transpose(coordinate_projection(lo, hi));
      bonds.push_back(linear_bonding(k, k + 1, Box::cube(lo), Box::cube(hi), p, p, p));
    }
  }
  return Tower(kind, std::move(levels), std::move(bonds));
}

/// Constant so(3) bundles over [-1,1]^2 with identity bondings.
inline Tower make_so3_identity_tower(std::size_t height) {
  std::vector<Prolongation> levels;
  for (std::size_t k = 0; k < height; ++k) {
    levels.emplace_back(make_builtin("lie-algebra:so3"), Fibration(Box::cube(2), Box::cube(2)));
  }
  std::vector<BondingTriple> bonds;
  for (std::size_t k = 0; k + 1 < height; ++k) {
    bonds.push_back(linear_bonding(k, k + 1, Box::cube(2), Box::cube(2), Mat<double>::identity(2),
                                   Mat<double>::identity(3), Mat<double>::identity(2)));
  }
  return Tower(TowerKind::projective, std::move(levels), std::move(bonds));
}

/// A tower together with the checks it is constructed to fail (empty for compatible towers).
struct TowerFixture {
  std::string name;
  Tower tower;
  std::vector<std::string> expected_failures;
};

inline std::vector<TowerFixture> tower_fixtures() {
  std::vector<TowerFixture> out;
  out.push_back({"projection", make_coordinate_tower(TowerKind::projective, {1, 2, 3}), {}});
  out.push_back({"inclusion", make_coordinate_tower(TowerKind::direct, {1, 2, 3}), {}});
  out.push_back({"so3-identity", make_so3_identity_tower(3), {}});

  {  // explicit long-range bonding that disagrees with the chain
    auto base = make_coordinate_tower(TowerKind::projective, {1, 2, 3});
    std::vector<BondingTriple> bonds{base.consecutive(0), base.consecutive(1)};
    Mat<double> wrong(1, 3);
    wrong(0, 1) = 1.0;
    bonds.push_back(linear_bonding(0, 2, Box::cube(3), Box::cube(1), wrong, wrong, wrong));
    out.push_back({"scrambled-composite", Tower(TowerKind::projective, base.levels(), bonds), {"bonding-laws"}});
  }
  {  // anchor doubled on the middle level
    auto base = make_coordinate_tower(TowerKind::projective, {1, 2, 3});
    auto levels = base.levels();
    Box b2 = Box::cube(2);
    LocalAlgebroid doubled("tangent:2x2", b2, 2, constant<Mat>(b2, 2.0 * Mat<double>::identity(2)),
                           constant<Bilinear>(b2, Bilinear<double>(2, 2, 2)), true);
    levels[1] = prolong_over_self(doubled);
    out.push_back({"scaled-anchor", Tower(TowerKind::projective, levels, {base.consecutive(0), base.consecutive(1)}),
                   {"anchored-sequence/anchor"}});
  }
  {  // lower level fiber box too small for the projected fibers
    auto base = make_coordinate_tower(TowerKind::projective, {1, 2, 3});
    auto levels = base.levels();
    levels[0] = Prolongation(levels[0].algebroid(), Fibration(Box::cube(1), Box::cube(1, -0.5, 0.5)));
    out.push_back({"small-fiber", Tower(TowerKind::projective, levels, {base.consecutive(0), base.consecutive(1)}),
                   {"prolong-compat/containment"}});
  }
  {  // fiber inclusion collapsed to zero on the first step
    auto base = make_coordinate_tower(TowerKind::direct, {1, 2, 3});
    auto b0 = base.consecutive(0);
    b0.fib_map = constant<Mat>(Box::cube(1), Mat<double>(2, 1));
    b0.total_map = VectorField();
    out.push_back({"rank-deficient", Tower(TowerKind::direct, base.levels(), {b0, base.consecutive(1)}),
                   {"direct-sequence/injectivity"}});
  }
  {  // total map whose base part is not the base inclusion
    auto base = make_coordinate_tower(TowerKind::direct, {1, 2, 3});
    auto b0 = base.consecutive(0);
    b0.total_map = VectorField(base.level(0).total(), [](const auto& p) {
      using S = typename std::decay_t<decltype(p)>::value_type;
      return Vec<S>{p[0], S(0.5) * p[0], p[1], S(0.0)};
    });
    out.push_back({"square-mismatch", Tower(TowerKind::direct, base.levels(), {b0, base.consecutive(1)}),
                   {"direct-sequence/square"}});
  }
  return out;
}

}  // namespace lalg
