#pragma once

// Exterior calculus over a bracket context. A k-form is a pointwise
// evaluation routine (x, v1..vk) -> scalar; the calculus operators build new
// routines that extend the argument vectors to constant sections, which is
// sound because every result is tensorial in its slots.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lalg/algebroid.hpp"
#include "lalg/context.hpp"
#include "lalg/error.hpp"
#include "lalg/field.hpp"
#include "lalg/polynomial.hpp"
#include "lalg/sampling.hpp"

namespace lalg {

template <class S>
using FormArgs = std::vector<Vec<S>>;

class KForm {
 public:
  template <class S>
  using Signature = S(const Vec<S>&, const FormArgs<S>&);

  KForm() = default;

  /// `f(x, args)` must be generic over the scalar kind, multilinear and alternating in args.
  template <class F>
  KForm(Box base, std::size_t fiber_dim, std::size_t degree, const F& f)
      : base_(std::make_shared<const Box>(std::move(base))),
        n_(fiber_dim),
        k_(degree),
        impl_(std::make_shared<const detail::Dispatch<Signature>>(f)) {}

  template <Scalar S>
  S operator()(const Vec<S>& x, const FormArgs<S>& args) const {
    if (!impl_) throw PreconditionError("evaluating an empty form");
    if (x.size() != base_->dim()) throw ShapeError("form evaluated at a point of the wrong dimension");
    if (args.size() != k_) {
      throw ShapeError("degree-" + std::to_string(k_) + " form given " + std::to_string(args.size()) + " arguments");
    }
    for (const auto& v : args) require_same_size(v.size(), n_, "form argument");
    return impl_->template get<S>()(x, args);
  }
  double operator()(const Vec<double>& x, const FormArgs<double>& args) const { return operator()<double>(x, args); }

  const Box& base() const { return *base_; }
  std::size_t fiber_dim() const { return n_; }
  std::size_t degree() const { return k_; }

 private:
  std::shared_ptr<const Box> base_;
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::shared_ptr<const detail::Dispatch<Signature>> impl_;
};

namespace detail {

template <class S>
FormArgs<S> without(const FormArgs<S>& v, std::size_t i) {
  FormArgs<S> r;
  r.reserve(v.size() - 1);
  for (std::size_t k = 0; k < v.size(); ++k)
    if (k != i) r.push_back(v[k]);
  return r;
}

template <class S>
FormArgs<S> without(const FormArgs<S>& v, std::size_t i, std::size_t j) {
  FormArgs<S> r;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (k != i && k != j) r.push_back(v[k]);
  return r;
}

/// All increasing k-subsets of {0..n-1}.
inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) c.push_back(i);
    out.push_back(std::move(c));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

/// (k,l)-shuffles as (first block, second block, sign).
struct Shuffle {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  int sign = 1;
};

inline std::vector<Shuffle> shuffles(std::size_t k, std::size_t l) {
  std::vector<Shuffle> out;
  for (auto& first : combinations(k + l, k)) {
    Shuffle s;
    s.first = first;
    for (std::size_t i = 0; i < k + l; ++i)
      if (!std::binary_search(first.begin(), first.end(), i)) s.second.push_back(i);
    // Sign of the permutation (first, second): count inversions.
    std::size_t inversions = 0;
    for (std::size_t a : s.first)
      for (std::size_t b : s.second)
        if (a > b) ++inversions;
    s.sign = (inversions % 2 == 0) ? 1 : -1;
    out.push_back(std::move(s));
  }
  return out;
}

template <class S>
FormArgs<S> pick(const FormArgs<S>& v, const std::vector<std::size_t>& idx) {
  FormArgs<S> r;
  r.reserve(idx.size());
  for (auto i : idx) r.push_back(v[i]);
  return r;
}

/// Determinant of the minor with rows `rows` of the matrix whose columns are `vs`.
template <class S>
S minor_determinant(const std::vector<std::size_t>& rows, const FormArgs<S>& vs) {
  const std::size_t k = rows.size();
  if (k == 0) return S(1.0);
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  S total(0.0);
  do {
    std::size_t inversions = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (perm[i] > perm[j]) ++inversions;
    S prod(inversions % 2 == 0 ? 1.0 : -1.0);
    for (std::size_t c = 0; c < k; ++c) prod = prod * vs[c][rows[perm[c]]];
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

template <class T, class S>
FormArgs<T> embed_args(const FormArgs<S>& args) {
  FormArgs<T> r;
  r.reserve(args.size());
  for (const auto& v : args) r.push_back(embed_all<T>(v));
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementary forms.

/// A function viewed as a 0-form.
inline KForm function_form(const ScalarField& f, std::size_t fiber_dim) {
  return KForm(f.domain(), fiber_dim, 0, [f](const auto& x, const auto&) { return f(x); });
}

inline KForm zero_form(const Box& base, std::size_t fiber_dim, std::size_t degree) {
  return KForm(base, fiber_dim, degree, [](const auto& x, const auto&) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    return S(0.0);
  });
}

/// coeff(x) * (dx_{i1} ∧ ... ∧ dx_{ik}) in the fiber coordinates.
inline KForm coordinate_form(const ScalarField& coeff, std::size_t fiber_dim, std::vector<std::size_t> indices) {
  for (auto i : indices)
    if (i >= fiber_dim) throw ShapeError("coordinate form index out of range");
  const std::size_t k = indices.size();
  return KForm(coeff.domain(), fiber_dim, k, [coeff, indices = std::move(indices)](const auto& x, const auto& args) {
    return coeff(x) * detail::minor_determinant(indices, args);
  });
}

inline KForm coordinate_form(const Box& base, std::size_t fiber_dim, std::vector<std::size_t> indices) {
  return coordinate_form(constant<Value>(base, 1.0), fiber_dim, std::move(indices));
}

/// Constant 1-form v -> xi . v.
inline KForm constant_one_form(const Box& base, const Vec<double>& xi) {
  return KForm(base, xi.size(), 1, [xi](const auto& x, const auto& args) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    S r(0.0);
    for (std::size_t i = 0; i < xi.size(); ++i) r += S(xi[i]) * args[0][i];
    return r;
  });
}

/// 1-form v -> w(x) . v for a covector field w.
inline KForm one_form(const VectorField& w) {
  const std::size_t n = w(Vec<double>(w.dim(), 0.0)).size();
  return KForm(w.domain(), n, 1, [w](const auto& x, const auto& args) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    auto c = w(x);
    S r(0.0);
    for (std::size_t i = 0; i < c.size(); ++i) r += c[i] * args[0][i];
    return r;
  });
}

inline void require_compatible(const KForm& a, const KForm& b, const char* what) {
  if (!(a.base() == b.base()) || a.fiber_dim() != b.fiber_dim()) {
    throw ShapeError(std::string(what) + ": forms over different bundles");
  }
}

inline KForm add(const KForm& a, const KForm& b) {
  require_compatible(a, b, "form sum");
  if (a.degree() != b.degree()) throw ShapeError("form sum: degrees differ");
  return KForm(a.base(), a.fiber_dim(), a.degree(), [a, b](const auto& x, const auto& args) { return a(x, args) + b(x, args); });
}

inline KForm subtract(const KForm& a, const KForm& b) {
  require_compatible(a, b, "form difference");
  if (a.degree() != b.degree()) throw ShapeError("form difference: degrees differ");
  return KForm(a.base(), a.fiber_dim(), a.degree(), [a, b](const auto& x, const auto& args) { return a(x, args) - b(x, args); });
}

inline KForm scale(double c, const KForm& a) {
  return KForm(a.base(), a.fiber_dim(), a.degree(), [a, c](const auto& x, const auto& args) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    return S(c) * a(x, args);
  });
}

/// omega evaluated on sections: x -> omega_x(a1(x), ..., ak(x)).
inline ScalarField evaluate_on(const KForm& omega, const std::vector<Section>& sections) {
  if (sections.size() != omega.degree()) throw ShapeError("evaluate_on: wrong number of sections");
  for (const auto& s : sections)
    if (!(s.domain() == omega.base())) throw ShapeError("evaluate_on: section over a different box");
  return ScalarField(omega.base(), [omega, sections](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    FormArgs<S> args;
    args.reserve(sections.size());
    for (const auto& s : sections) args.push_back(s(x));
    return omega(x, args);
  });
}

// ---------------------------------------------------------------------------
// Algebraic operators.

/// Insertion i_a omega; the zero form when omega has degree 0.
inline KForm insert(const Section& a, const KForm& omega) {
  if (!(a.domain() == omega.base())) throw ShapeError("insert: section over a different box");
  const std::size_t n = omega.fiber_dim();
  if (a(Vec<double>(a.dim(), 0.0)).size() != n) throw ShapeError("insert: section fiber dimension mismatch");
  if (omega.degree() == 0) return zero_form(omega.base(), n, 0);
  return KForm(omega.base(), n, omega.degree() - 1, [a, omega](const auto& x, const auto& args) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    FormArgs<S> full;
    full.reserve(args.size() + 1);
    full.push_back(a(x));
    full.insert(full.end(), args.begin(), args.end());
    return omega(x, full);
  });
}

/// Shuffle-convention wedge: no factorial normalization, so dx1∧dx2(e1, e2) = 1.
inline KForm wedge(const KForm& eta, const KForm& zeta) {
  require_compatible(eta, zeta, "wedge");
  const std::size_t k = eta.degree();
  const std::size_t l = zeta.degree();
  auto shuffles = std::make_shared<const std::vector<detail::Shuffle>>(detail::shuffles(k, l));
  return KForm(eta.base(), eta.fiber_dim(), k + l, [eta, zeta, shuffles](const auto& x, const auto& args) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    S total(0.0);
    for (const auto& sh : *shuffles) {
      S term = eta(x, detail::pick(args, sh.first)) * zeta(x, detail::pick(args, sh.second));
      total += sh.sign > 0 ? term : -term;
    }
    return total;
  });
}

// ---------------------------------------------------------------------------
// Differential operators.

namespace detail {

/// d/dt omega_{x + t dir}(args) at t = 0, with args held constant.
template <Scalar S>
S form_directional(const KForm& omega, const Vec<S>& x, const Vec<S>& dir, const FormArgs<S>& args) {
  if constexpr (!can_differentiate_v<S>) {
    throw DepthError("derivative requested beyond the supported jet depth");
  } else {
    Vec<Jet<S>> seeded(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) seeded[i] = Jet<S>(x[i], dir[i]);
    return omega(seeded, embed_args<Jet<S>>(args)).d;
  }
}

/// [a, b](x) for a general section a and the constant section with value v.
template <Scalar S>
Vec<S> bracket_with_constant(const BracketContext& ctx, const Section& a, const Vec<S>& v, const Vec<S>& x) {
  return ctx(a, constant_at<S>(ctx.base, v))(x);
}

template <Scalar S>
Vec<S> bracket_of_constants(const BracketContext& ctx, const Vec<S>& u, const Vec<S>& v, const Vec<S>& x) {
  return ctx(constant_at<S>(ctx.base, u), constant_at<S>(ctx.base, v))(x);
}

inline void require_context_form(const BracketContext& ctx, const KForm& omega, const char* what) {
  if (!(omega.base() == ctx.base) || omega.fiber_dim() != ctx.fiber_dim) {
    throw ShapeError(std::string(what) + ": form does not live on the context's bundle");
  }
}

}  // namespace detail

/// d_rho f: v -> df_x(rho_x v).
inline KForm d_rho_fn(const BracketContext& ctx, const ScalarField& f) {
  if (!(f.domain() == ctx.base)) throw ShapeError("d_rho_fn: function over a different box");
  return KForm(ctx.base, ctx.fiber_dim, 1, [rho = ctx.anchor, f](const auto& x, const auto& args) {
    return directional_at(f, x, rho(x) * args[0]);
  });
}

/// Lie derivative L_a omega:
///   (L_a omega)(v1..vk) = rho(a)(omega(v1..vk)) - sum_i omega(v1, .., [a, v_i], .., vk).
inline KForm lie_derivative_form(const BracketContext& ctx, const Section& a, const KForm& omega) {
  detail::require_context_form(ctx, omega, "lie_derivative_form");
  require_section_of(ctx, a, "lie_derivative_form");
  return KForm(ctx.base, ctx.fiber_dim, omega.degree(), [ctx, a, omega](const auto& x, const auto& args) {
    auto dir = ctx.anchor(x) * a(x);
    auto total = detail::form_directional(omega, x, dir, args);
    for (std::size_t i = 0; i < args.size(); ++i) {
      auto moved = args;
      moved[i] = detail::bracket_with_constant(ctx, a, args[i], x);
      total -= omega(x, moved);
    }
    return total;
  });
}

/// Exterior derivative:
///   d omega(v0..vk) = sum_i (-1)^i rho(v_i)(omega(..v̂_i..))
///                   + sum_{i<j} (-1)^{i+j} omega([v_i, v_j], ..v̂_i..v̂_j..).
inline KForm exterior_derivative(const BracketContext& ctx, const KForm& omega) {
  detail::require_context_form(ctx, omega, "exterior_derivative");
  return KForm(ctx.base, ctx.fiber_dim, omega.degree() + 1, [ctx, omega](const auto& x, const auto& args) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    auto rho = ctx.anchor(x);
    S total(0.0);
    for (std::size_t i = 0; i < args.size(); ++i) {
      S term = detail::form_directional(omega, x, rho * args[i], detail::without(args, i));
      total += (i % 2 == 0) ? term : -term;
    }
    for (std::size_t i = 0; i < args.size(); ++i)
      for (std::size_t j = i + 1; j < args.size(); ++j) {
        FormArgs<S> rest = detail::without(args, i, j);
        rest.insert(rest.begin(), detail::bracket_of_constants(ctx, args[i], args[j], x));
        S term = omega(x, rest);
        total += ((i + j) % 2 == 0) ? term : -term;
      }
    return total;
  });
}

/// The same alternating formula on arbitrary sections, evaluated at x. Agrees
/// with exterior_derivative(ctx, omega) applied to the values a_i(x).
inline double exterior_derivative_on_sections(const BracketContext& ctx, const KForm& omega,
                                              const std::vector<Section>& sections, const Vec<double>& x) {
  detail::require_context_form(ctx, omega, "exterior_derivative_on_sections");
  if (sections.size() != omega.degree() + 1) throw ShapeError("exterior_derivative_on_sections: wrong section count");
  require_interior(ctx.base, x, "exterior_derivative_on_sections");
  double total = 0.0;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    std::vector<Section> rest;
    for (std::size_t k = 0; k < sections.size(); ++k)
      if (k != i) rest.push_back(sections[k]);
    double term = anchor_derivative(ctx, sections[i], evaluate_on(omega, rest))(x);
    total += (i % 2 == 0) ? term : -term;
  }
  for (std::size_t i = 0; i < sections.size(); ++i)
    for (std::size_t j = i + 1; j < sections.size(); ++j) {
      std::vector<Section> rest{ctx(sections[i], sections[j])};
      for (std::size_t k = 0; k < sections.size(); ++k)
        if (k != i && k != j) rest.push_back(sections[k]);
      double term = evaluate_on(omega, rest)(x);
      total += ((i + j) % 2 == 0) ? term : -term;
    }
  return total;
}

/// Pullback along a bundle morphism: (Phi* omega)_x(v..) = omega_{psi(x)}(Phi(x) v, ..).
inline KForm pullback_form(const BundleMorphism& phi, const KForm& omega) {
  if (!(phi.target == omega.base())) throw ShapeError("pullback_form: form does not live on the target box");
  const Vec<double> probe(phi.source().dim(), 0.0);
  const auto fiber = phi.fiber_map(probe);
  if (fiber.rows != omega.fiber_dim()) throw ShapeError("pullback_form: fiber map lands in the wrong dimension");
  return KForm(phi.source(), fiber.cols, omega.degree(), [phi, omega](const auto& x, const auto& args) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    auto y = phi.base_map(x);
    if (!phi.target.interior(primal_of(y))) {
      throw DomainError("pullback_form: base map leaves the target box at " + format_point(primal_of(x)));
    }
    auto m = phi.fiber_map(x);
    FormArgs<S> pushed;
    pushed.reserve(args.size());
    for (const auto& v : args) pushed.push_back(m * v);
    return omega(y, pushed);
  });
}

// ---------------------------------------------------------------------------
// Morphism and form-axiom probes.

struct LamDefect {
  Vec<double> lam1;  // on each fiber basis vector of the source
  Vec<double> lam2;  // on each basis pair (i < j)
  double lam1_max() const { return max_abs(lam1); }
  double lam2_max() const { return max_abs(lam2); }
};

/// LAM1: Phi*(d f) - d(f o psi); LAM2: Phi*(d omega) - d(Phi* omega), on basis probes at x.
inline LamDefect lam_defect(const BracketContext& ctx1, const BracketContext& ctx2, const BundleMorphism& phi,
                            const ScalarField& f, const KForm& omega, const Vec<double>& x) {
  require_interior(ctx1.base, x, "lam_defect");
  if (omega.degree() != 1) throw ShapeError("lam_defect: the second condition is stated for 1-forms");
  phi.image_of(x);
  const std::size_t n = ctx1.fiber_dim;
  auto lhs1 = pullback_form(phi, d_rho_fn(ctx2, f));
  auto rhs1 = d_rho_fn(ctx1, compose(f, phi.base_map));
  auto lhs2 = pullback_form(phi, exterior_derivative(ctx2, omega));
  auto rhs2 = exterior_derivative(ctx1, pullback_form(phi, omega));
  LamDefect d;
  for (std::size_t i = 0; i < n; ++i) {
    FormArgs<double> v{basis<double>(n, i)};
    d.lam1.push_back(lhs1(x, v) - rhs1(x, v));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      FormArgs<double> v{basis<double>(n, i), basis<double>(n, j)};
      d.lam2.push_back(lhs2(x, v) - rhs2(x, v));
    }
  return d;
}

/// Largest violation of multilinearity and antisymmetry over random probes at x.
inline double form_axiom_defect(const KForm& omega, const Vec<double>& x, Rng& rng, std::size_t probes = 4) {
  const std::size_t k = omega.degree();
  const std::size_t n = omega.fiber_dim();
  double worst = 0.0;
  for (std::size_t p = 0; p < probes && k > 0; ++p) {
    FormArgs<double> args;
    for (std::size_t i = 0; i < k; ++i) args.push_back(rng.vector(n));
    double base = omega(x, args);
    std::size_t slot = rng.index(k);
    Vec<double> w = rng.vector(n);
    double c = rng.uniform(-2.0, 2.0);
    auto mixed = args;
    mixed[slot] = c * args[slot] + w;
    auto only_w = args;
    only_w[slot] = w;
    worst = std::max(worst, std::abs(omega(x, mixed) - (c * base + omega(x, only_w))));
    if (k >= 2) {
      std::size_t i = rng.index(k);
      std::size_t j = (i + 1 + rng.index(k - 1)) % k;
      auto swapped = args;
      std::swap(swapped[i], swapped[j]);
      worst = std::max(worst, std::abs(omega(x, swapped) + base));
    }
  }
  return worst;
}

/// Values on increasing basis tuples (e_{i1}, .., e_{ik}), in lexicographic order.
inline std::vector<double> coefficients(const KForm& omega, const Vec<double>& x) {
  std::vector<double> out;
  for (const auto& idx : detail::combinations(omega.fiber_dim(), omega.degree())) {
    FormArgs<double> args;
    for (auto i : idx) args.push_back(basis<double>(omega.fiber_dim(), i));
    out.push_back(omega(x, args));
  }
  return out;
}

/// Random polynomial-coefficient k-form sum_I c_I(x) dx_I.
inline KForm random_form(Rng& rng, const Box& base, std::size_t fiber_dim, std::size_t degree, int max_degree = 2) {
  KForm total = zero_form(base, fiber_dim, degree);
  for (auto& idx : detail::combinations(fiber_dim, degree)) {
    total = add(total, coordinate_form(random_poly_scalar_field(rng, base, max_degree), fiber_dim, idx));
  }
  return total;
}

}  // namespace lalg
