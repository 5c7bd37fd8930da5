#pragma once

// Smooth fields on a coordinate box. A field is one generic evaluation
// routine, type-erased once per supported scalar kind (double, J1, J2, J3),
// so every formula downstream is written once and differentiated by seeding
// jets instead of by finite differences.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lalg/error.hpp"
#include "lalg/jet.hpp"
#include "lalg/linalg.hpp"

namespace lalg {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// Axis-aligned box of closed intervals; points strictly inside are "interior".
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      if (!(bounds_[i].lo < bounds_[i].hi)) {
        throw ValidationError("box coordinate " + std::to_string(i) + " has empty interior");
      }
    }
  }

  static Box cube(std::size_t dim, double lo = -1.0, double hi = 1.0) {
    return Box(std::vector<Interval>(dim, Interval{lo, hi}));
  }

  std::size_t dim() const { return bounds_.size(); }
  const Interval& operator[](std::size_t i) const { return bounds_[i]; }
  const std::vector<Interval>& bounds() const { return bounds_; }

  bool interior(const Vec<double>& x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
      if (!(bounds_[i].lo < x[i] && x[i] < bounds_[i].hi)) return false;
    return true;
  }

  bool contains(const Vec<double>& x, double slack = 0.0) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
      if (x[i] < bounds_[i].lo - slack || x[i] > bounds_[i].hi + slack) return false;
    return true;
  }

  /// Cartesian product (this box first).
  Box times(const Box& other) const {
    auto b = bounds_;
    b.insert(b.end(), other.bounds_.begin(), other.bounds_.end());
    return Box(std::move(b));
  }

  Box slice(std::size_t begin, std::size_t count) const {
    if (begin + count > dim()) throw ShapeError("box slice out of range");
    return Box(std::vector<Interval>(bounds_.begin() + static_cast<std::ptrdiff_t>(begin),
                                     bounds_.begin() + static_cast<std::ptrdiff_t>(begin + count)));
  }

  bool operator==(const Box&) const = default;

 private:
  std::vector<Interval> bounds_;
};

inline std::string format_point(const Vec<double>& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(x[i]);
  }
  return s + ")";
}

inline void require_interior(const Box& box, const Vec<double>& x, const char* what) {
  if (x.size() != box.dim()) {
    throw ShapeError(std::string(what) + ": point has dimension " + std::to_string(x.size()) +
                     ", domain has " + std::to_string(box.dim()));
  }
  if (!box.interior(x)) throw DomainError(std::string(what) + ": point " + format_point(x) + " not interior");
}

namespace detail {

/// One std::function per supported scalar kind, all built from the same callable.
template <template <class> class Sig>
class Dispatch {
 public:
  template <class F>
  explicit Dispatch(const F& f) : fns_(f, f, f, f) {}

  template <class S>
  const std::function<Sig<S>>& get() const {
    return std::get<std::function<Sig<S>>>(fns_);
  }

 private:
  std::tuple<std::function<Sig<double>>, std::function<Sig<J1>>, std::function<Sig<J2>>,
             std::function<Sig<J3>>>
      fns_;
};

}  // namespace detail

/// Smooth map from a box in R^d to values of kind V (scalar, Vec, Mat, Bilinear).
template <template <class> class V>
class Field {
 public:
  template <class S>
  using Signature = V<S>(const Vec<S>&);

  Field() = default;

  /// `f` must be callable as f(const Vec<S>&) -> V<S> for every scalar kind S.
  template <class F>
  Field(Box domain, const F& f)
      : domain_(std::make_shared<const Box>(std::move(domain))),
        impl_(std::make_shared<const detail::Dispatch<Signature>>(f)) {}

  template <Scalar S>
  V<S> operator()(const Vec<S>& x) const {
    if (!impl_) throw PreconditionError("evaluating an empty field");
    if (x.size() != domain_->dim()) {
      throw ShapeError("field evaluated with " + std::to_string(x.size()) + " coordinates, domain has " +
                       std::to_string(domain_->dim()));
    }
    return impl_->template get<S>()(x);
  }
  V<double> operator()(const Vec<double>& x) const { return operator()<double>(x); }

  const Box& domain() const { return *domain_; }
  std::size_t dim() const { return domain_ ? domain_->dim() : 0; }
  bool empty() const { return !impl_; }

 private:
  std::shared_ptr<const Box> domain_;
  std::shared_ptr<const detail::Dispatch<Signature>> impl_;
};

using ScalarField = Field<Value>;
using VectorField = Field<Vec>;
using MatrixField = Field<Mat>;
using BilinearField = Field<Bilinear>;

// ---------------------------------------------------------------------------
// Jet-path derivatives, usable inside generic evaluation routines.

/// Derivative of `f` at x along v, computed one jet level deeper than S.
template <template <class> class V, Scalar S>
V<S> directional_at(const Field<V>& f, const Vec<S>& x, const Vec<S>& v) {
  if constexpr (!can_differentiate_v<S>) {
    throw DepthError("derivative requested beyond the supported jet depth");
  } else {
    require_same_size(x.size(), v.size(), "direction");
    Vec<Jet<S>> seeded(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) seeded[i] = Jet<S>(x[i], v[i]);
    return fmap(f(seeded), [](const Jet<S>& j) { return j.d; });
  }
}

template <Scalar S>
Mat<S> jacobian_at(const VectorField& f, const Vec<S>& x) {
  const std::size_t d = x.size();
  Mat<S> jac;
  for (std::size_t j = 0; j < d; ++j) {
    Vec<S> col = directional_at(f, x, basis<S>(d, j));
    if (j == 0) jac = Mat<S>(col.size(), d);
    for (std::size_t i = 0; i < col.size(); ++i) jac(i, j) = col[i];
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Public derivative operations on real points (domain checked).

template <template <class> class V>
V<double> directional(const Field<V>& f, const Vec<double>& x, const Vec<double>& v) {
  require_interior(f.domain(), x, "directional");
  require_same_size(v.size(), f.dim(), "directional: direction");
  return directional_at(f, x, v);
}

inline Mat<double> jacobian(const VectorField& f, const Vec<double>& x) {
  require_interior(f.domain(), x, "jacobian");
  if (f.dim() == 0) return Mat<double>(f(x).size(), 0);
  return jacobian_at(f, x);
}

/// Mixed second derivative d/du d/dv f(x), through two nested seeds.
template <template <class> class V>
V<double> second_directional(const Field<V>& f, const Vec<double>& x, const Vec<double>& u,
                             const Vec<double>& v) {
  require_interior(f.domain(), x, "second_directional");
  require_same_size(u.size(), f.dim(), "second_directional: first direction");
  require_same_size(v.size(), f.dim(), "second_directional: second direction");
  Vec<J2> seeded(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) seeded[i] = J2(J1(x[i], u[i]), J1(v[i], 0.0));
  return fmap(f(seeded), [](const J2& j) { return j.d.d; });
}

// ---------------------------------------------------------------------------
// Elementary constructors and combinators.

/// Field that ignores its argument and returns `value` (promoted to the evaluation scalar).
template <template <class> class V>
Field<V> constant(Box domain, V<double> value) {
  return Field<V>(std::move(domain), [value](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    return embed_all<S>(value);
  });
}

/// Constant vector field whose value already carries jet parts of kind S.
/// It can be evaluated at S or any deeper kind; shallower kinds would lose
/// derivative information and are rejected.
template <Scalar S>
VectorField constant_at(Box domain, Vec<S> value) {
  return VectorField(std::move(domain), [value](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::value_type;
    if constexpr (jet_depth_v<T> >= jet_depth_v<S>) {
      return embed_all<T>(value);
    } else {
      throw DepthError("constant carries deeper jet data than the evaluation point");
      return Vec<T>{};
    }
  });
}

inline VectorField zero_vector_field(Box domain, std::size_t n) {
  return constant<Vec>(std::move(domain), Vec<double>(n, 0.0));
}

inline VectorField identity_map(Box domain) {
  return VectorField(std::move(domain), [](const auto& x) { return x; });
}

/// Linear map x -> A x (+ b).
inline VectorField affine_map(Box domain, Mat<double> a, Vec<double> b = {}) {
  if (b.empty()) b.assign(a.rows, 0.0);
  require_same_size(a.cols, domain.dim(), "affine map input");
  require_same_size(a.rows, b.size(), "affine map offset");
  return VectorField(std::move(domain), [a, b](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    return embed_all<S>(a) * x + embed_all<S>(b);
  });
}

/// f ∘ g, defined on g's domain.
template <template <class> class V>
Field<V> compose(const Field<V>& f, const VectorField& g) {
  return Field<V>(g.domain(), [f, g](const auto& x) { return f(g(x)); });
}

inline ScalarField component(const VectorField& f, std::size_t k) {
  return ScalarField(f.domain(), [f, k](const auto& x) {
    auto v = f(x);
    if (k >= v.size()) throw ShapeError("component index out of range");
    return v[k];
  });
}

inline VectorField scale(const ScalarField& s, const VectorField& f) {
  return VectorField(f.domain(), [s, f](const auto& x) { return s(x) * f(x); });
}

inline VectorField add(const VectorField& a, const VectorField& b) {
  return VectorField(a.domain(), [a, b](const auto& x) { return a(x) + b(x); });
}

inline VectorField subtract(const VectorField& a, const VectorField& b) {
  return VectorField(a.domain(), [a, b](const auto& x) { return a(x) - b(x); });
}

inline VectorField apply(const MatrixField& m, const VectorField& f) {
  return VectorField(f.domain(), [m, f](const auto& x) { return m(x) * f(x); });
}

inline ScalarField product(const ScalarField& a, const ScalarField& b) {
  return ScalarField(a.domain(), [a, b](const auto& x) { return a(x) * b(x); });
}

/// Jacobian of a map as a matrix field (one jet level deeper per evaluation).
inline MatrixField jacobian_field(const VectorField& f) {
  return MatrixField(f.domain(), [f](const auto& x) { return jacobian_at(f, x); });
}

/// Re-express a field on `base` as a field on base × fiber that ignores the fiber coordinates.
template <template <class> class V>
Field<V> pull_to_total(const Field<V>& f, const Box& total) {
  const std::size_t m = f.dim();
  if (total.dim() < m || !(total.slice(0, m) == f.domain())) {
    throw ShapeError("pull_to_total: base box is not a leading factor of the total box");
  }
  return Field<V>(total, [f, m](const auto& xe) { return f(slice(xe, 0, m)); });
}

}  // namespace lalg
