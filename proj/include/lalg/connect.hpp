#pragma once

// Nonlinear connections on a prolongation, encoded by a Christoffel field
// F: total box -> L(R^n, R^e). The involution is N = [[I, 0], [-2F, -I]],
// so h = (Id + N)/2 = [[I, 0], [-F, 0]] and v = (Id - N)/2 = [[0, 0], [F, I]].

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "lalg/error.hpp"
#include "lalg/field.hpp"
#include "lalg/linalg.hpp"
#include "lalg/prolong.hpp"
#include "lalg/sampling.hpp"

namespace lalg {

namespace detail {

inline bool same_prolongation(const Prolongation& p, const Prolongation& q) {
  return p.total() == q.total() && p.alg_dim() == q.alg_dim() && p.base_dim() == q.base_dim() &&
         p.algebroid().name() == q.algebroid().name();
}

template <Scalar S>
Mat<S> involution_from(const Mat<S>& christoffel) {
  const std::size_t e = christoffel.rows;
  const std::size_t n = christoffel.cols;
  Mat<S> r(n + e, n + e);
  for (std::size_t i = 0; i < n; ++i) r(i, i) = S(1.0);
  for (std::size_t k = 0; k < e; ++k) {
    for (std::size_t j = 0; j < n; ++j) r(n + k, j) = S(-2.0) * christoffel(k, j);
    r(n + k, n + k) = S(-1.0);
  }
  return r;
}

}  // namespace detail

/// Field of maps R^(n+e) -> R^(n+e) with range and kernel both containing the vertical block.
struct SemiBasicTensor {
  MatrixField eval;
};

class Connection {
 public:
  Connection(Prolongation prol, MatrixField christoffel, std::size_t samples = 16, std::uint64_t seed = 0xc0ffee)
      : prol_(std::move(prol)), christoffel_(std::move(christoffel)) {
    if (!(christoffel_.domain() == prol_.total())) throw ShapeError("connection: Christoffel field must live over the total box");
    const std::size_t n = prol_.alg_dim();
    const std::size_t e = prol_.fiber_dim();
    involution_ = MatrixField(prol_.total(), [f = christoffel_](const auto& p) { return detail::involution_from(f(p)); });
    for (const auto& p : sample_points(prol_.total(), samples, seed)) {
      auto f = christoffel_(p);
      if (f.rows != e || f.cols != n) {
        throw ShapeError("connection: Christoffel field must be " + std::to_string(e) + "x" + std::to_string(n));
      }
      auto nn = involution_(p);
      if (max_abs(nn * nn - Mat<double>::identity(n + e)) != 0.0) {
        throw ConsistencyError("connection: N^2 != Id at " + format_point(p));
      }
    }
  }

  const Prolongation& prolongation() const { return prol_; }
  const MatrixField& christoffel() const { return christoffel_; }
  const MatrixField& involution() const { return involution_; }

  /// h = (Id + N) / 2.
  MatrixField horizontal() const {
    const std::size_t d = prol_.alg_dim() + prol_.fiber_dim();
    return MatrixField(prol_.total(), [nf = involution_, d](const auto& p) {
      using S = typename std::decay_t<decltype(p)>::value_type;
      return S(0.5) * (Mat<S>::identity(d) + nf(p));
    });
  }

  /// v = (Id - N) / 2.
  MatrixField vertical() const {
    const std::size_t d = prol_.alg_dim() + prol_.fiber_dim();
    return MatrixField(prol_.total(), [nf = involution_, d](const auto& p) {
      using S = typename std::decay_t<decltype(p)>::value_type;
      return S(0.5) * (Mat<S>::identity(d) - nf(p));
    });
  }

 private:
  Prolongation prol_;
  MatrixField christoffel_;
  MatrixField involution_;
};

inline Connection make_connection(const Prolongation& prol, const MatrixField& christoffel) {
  return Connection(prol, christoffel);
}

struct Projectors {
  MatrixField h;
  MatrixField v;
};

inline Projectors projectors(const Connection& conn) { return {conn.horizontal(), conn.vertical()}; }

/// (x, e) -> (a(x), -F_(x,e) a(x)).
inline ModuleSection horizontal_lift(const Connection& conn, const Section& a) {
  const auto& prol = conn.prolongation();
  const std::size_t m = prol.base_dim();
  prol.algebroid().check_section(a, "horizontal_lift");
  VectorField z(prol.total(), [f = conn.christoffel(), a, m](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    return S(-1.0) * (f(p) * a(slice(p, 0, m)));
  });
  return ModuleSection(make_projectable(prol, a, z));
}

/// Max |entry| of the algebroid rows and vertical columns of a candidate semi-basic map at p.
inline double semi_basic_violation(const Mat<double>& u, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.rows; ++i)
    for (std::size_t j = 0; j < u.cols; ++j)
      if (i < n || j >= n) worst = std::max(worst, std::abs(u(i, j)));
  return worst;
}

/// N' - N, checked to be semi-basic on samples.
inline SemiBasicTensor semi_basic_difference(const Connection& n1, const Connection& n2, std::size_t samples = 16,
                                             std::uint64_t seed = 0xd1ff) {
  if (!detail::same_prolongation(n1.prolongation(), n2.prolongation())) {
    throw PreconditionError("semi_basic_difference: connections on different prolongations");
  }
  const auto& prol = n1.prolongation();
  MatrixField diff(prol.total(), [a = n1.involution(), b = n2.involution()](const auto& p) { return b(p) - a(p); });
  for (const auto& p : sample_points(prol.total(), samples, seed)) {
    if (semi_basic_violation(diff(p), prol.alg_dim()) != 0.0) {
      throw ConsistencyError("semi_basic_difference: N' - N is not semi-basic at " + format_point(p));
    }
  }
  return {diff};
}

/// The connection N + U; U must be semi-basic.
inline Connection apply(const Connection& conn, const SemiBasicTensor& u, std::size_t samples = 16,
                        std::uint64_t seed = 0xd1ff) {
  const auto& prol = conn.prolongation();
  const std::size_t n = prol.alg_dim();
  const std::size_t e = prol.fiber_dim();
  if (!(u.eval.domain() == prol.total())) throw ShapeError("apply: semi-basic tensor over a different box");
  for (const auto& p : sample_points(prol.total(), samples, seed)) {
    auto up = u.eval(p);
    if (up.rows != n + e || up.cols != n + e) throw ShapeError("apply: semi-basic tensor has the wrong shape");
    if (semi_basic_violation(up, n) != 0.0) throw ValidationError("apply: tensor is not semi-basic at " + format_point(p));
  }
  // Lower-left block of N + U is -2F + U_za = -2(F - U_za / 2).
  MatrixField shifted(prol.total(), [f = conn.christoffel(), uf = u.eval, n, e](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    auto fp = f(p);
    auto up = uf(p);
    Mat<S> r(e, n);
    for (std::size_t k = 0; k < e; ++k)
      for (std::size_t j = 0; j < n; ++j) r(k, j) = fp(k, j) - S(0.5) * up(n + k, j);
    return r;
  });
  return Connection(prol, shifted);
}

/// F_(x,e)(a) = G_x(rho_x a, e) for a linear connection G on the fibration.
inline Connection from_linear_connection(const Prolongation& prol, const BilinearField& gamma) {
  const std::size_t m = prol.base_dim();
  const std::size_t e = prol.fiber_dim();
  const std::size_t n = prol.alg_dim();
  if (!(gamma.domain() == prol.fibration().base)) throw ShapeError("from_linear_connection: Γ must live over the base box");
  Vec<double> center(m);
  for (std::size_t i = 0; i < m; ++i) center[i] = 0.5 * (prol.fibration().base[i].lo + prol.fibration().base[i].hi);
  auto g0 = gamma(center);
  if (g0.out != e || g0.in1 != m || g0.in2 != e) {
    throw ShapeError("from_linear_connection: Γ must map R^" + std::to_string(m) + " x R^" + std::to_string(e) +
                     " to R^" + std::to_string(e));
  }
  MatrixField christoffel(prol.total(), [gamma, rho = prol.algebroid().anchor(), m, e, n](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    auto x = slice(p, 0, m);
    auto g = gamma(x);
    auto r = rho(x);
    Mat<S> f(e, n);
    for (std::size_t k = 0; k < e; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        S acc(0.0);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < e; ++l) acc += g(k, i, l) * r(i, j) * p[m + l];
        f(k, j) = acc;
      }
    return f;
  });
  return Connection(prol, christoffel);
}

/// Pointwise algebraic invariants of a connection.
struct ConnectionDefects {
  double involution = 0.0;   // |N^2 - Id|
  double projectors = 0.0;   // h + v - Id, h^2 - h, v^2 - v, hv, vh, N - (h - v)
  double vertical_range = 0.0;   // algebroid rows of v
  double vertical_kernel = 0.0;  // h on the vertical block, and v - Id there
  double split_round_trip = 0.0;  // (a, v-part) -> element -> (a, v-part)
  double max() const {
    return std::max({involution, projectors, vertical_range, vertical_kernel, split_round_trip});
  }
};

inline ConnectionDefects connection_defects(const Connection& conn, const Vec<double>& at) {
  const auto& prol = conn.prolongation();
  require_interior(prol.total(), at, "connection_defects");
  const std::size_t n = prol.alg_dim();
  const std::size_t e = prol.fiber_dim();
  const std::size_t d = n + e;
  auto nn = conn.involution()(at);
  auto h = conn.horizontal()(at);
  auto v = conn.vertical()(at);
  auto id = Mat<double>::identity(d);
  ConnectionDefects r;
  r.involution = max_abs(nn * nn - id);
  r.projectors = std::max({max_abs(h + v - id), max_abs(h * h - h), max_abs(v * v - v), max_abs(h * v),
                           max_abs(v * h), max_abs(nn - (h - v))});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) r.vertical_range = std::max(r.vertical_range, std::abs(v(i, j)));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = n; j < d; ++j) {
      r.vertical_kernel = std::max(r.vertical_kernel, std::abs(h(i, j)));
      r.vertical_kernel = std::max(r.vertical_kernel, std::abs(v(i, j) - id(i, j)));
    }
  // Split witness: w -> (a, z + F a) and back through a + vertical part - F a.
  auto f = conn.christoffel()(at);
  for (std::size_t k = 0; k < d; ++k) {
    auto w = basis<double>(d, k);
    auto a = slice(w, 0, n);
    auto vz = slice(v * w, n, e);
    auto back = concat(a, vz - f * a);
    r.split_round_trip = std::max(r.split_round_trip, max_abs(back - w));
  }
  return r;
}

}  // namespace lalg
