#pragma once

// Independent reference computations for the test suites. Nothing here uses
// jets: derivatives come from central differences on plain doubles, and the
// algebraic references are written out by hand.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "lalg/linalg.hpp"

namespace oracle {

using lalg::Mat;
using lalg::Vec;

using ScalarFn = std::function<double(const Vec<double>&)>;
using VectorFn = std::function<Vec<double>(const Vec<double>&)>;

inline Vec<double> shifted(const Vec<double>& x, const Vec<double>& v, double t) {
  Vec<double> y(x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * v[i];
  return y;
}

inline double central_difference(const ScalarFn& f, const Vec<double>& x, const Vec<double>& v, double h = 1e-6) {
  return (f(shifted(x, v, h)) - f(shifted(x, v, -h))) / (2.0 * h);
}

inline Vec<double> central_difference(const VectorFn& f, const Vec<double>& x, const Vec<double>& v,
                                      double h = 1e-6) {
  Vec<double> p = f(shifted(x, v, h));
  Vec<double> m = f(shifted(x, v, -h));
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = (p[i] - m[i]) / (2.0 * h);
  return p;
}

inline Mat<double> fd_jacobian(const VectorFn& f, const Vec<double>& x, double h = 1e-6) {
  Vec<double> f0 = f(x);
  Mat<double> jac(f0.size(), x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    Vec<double> e(x.size(), 0.0);
    e[j] = 1.0;
    Vec<double> col = central_difference(f, x, e, h);
    for (std::size_t i = 0; i < col.size(); ++i) jac(i, j) = col[i];
  }
  return jac;
}

/// Vector-field bracket [X, Y] = DY X - DX Y with finite-difference Jacobians.
inline Vec<double> fd_vector_bracket(const VectorFn& x_field, const VectorFn& y_field, const Vec<double>& x,
                                     double h = 1e-5) {
  Vec<double> xv = x_field(x);
  Vec<double> yv = y_field(x);
  Vec<double> dy_x = central_difference(y_field, x, xv, h);
  Vec<double> dx_y = central_difference(x_field, x, yv, h);
  for (std::size_t i = 0; i < dy_x.size(); ++i) dy_x[i] -= dx_y[i];
  return dy_x;
}

/// Sign of a permutation given as an index vector.
inline int permutation_sign(std::vector<std::size_t> p) {
  int sign = 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (p[i] != i) {
      std::swap(p[i], p[p[i]]);
      sign = -sign;
    }
  }
  return sign;
}

/// Determinant of the k x k minor of the vectors' coordinates (rows `idx`),
/// i.e. (dx_idx0 ^ ... ^ dx_idxk)(v_0, ..., v_k), by a full permutation sum.
inline double coordinate_wedge(const std::vector<std::size_t>& idx, const std::vector<Vec<double>>& vs) {
  std::vector<std::size_t> p(idx.size());
  std::iota(p.begin(), p.end(), 0);
  double total = 0.0;
  do {
    double prod = permutation_sign(p);
    for (std::size_t r = 0; r < idx.size(); ++r) prod *= vs[p[r]][idx[r]];
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

/// Alternating permutation-sum wedge of two forms given as plain callables on
/// vector tuples, normalized as (k+l)!/(k! l!) shuffles, i.e. the sum over all
/// permutations divided by k! l!.
inline double permutation_wedge(const std::function<double(const std::vector<Vec<double>>&)>& eta, std::size_t k,
                                const std::function<double(const std::vector<Vec<double>>&)>& zeta, std::size_t l,
                                const std::vector<Vec<double>>& vs) {
  std::vector<std::size_t> p(k + l);
  std::iota(p.begin(), p.end(), 0);
  double total = 0.0;
  do {
    std::vector<Vec<double>> a, b;
    for (std::size_t i = 0; i < k; ++i) a.push_back(vs[p[i]]);
    for (std::size_t i = k; i < k + l; ++i) b.push_back(vs[p[i]]);
    total += permutation_sign(p) * eta(a) * zeta(b);
  } while (std::next_permutation(p.begin(), p.end()));
  double kf = 1.0, lf = 1.0;
  for (std::size_t i = 2; i <= k; ++i) kf *= static_cast<double>(i);
  for (std::size_t i = 2; i <= l; ++i) lf *= static_cast<double>(i);
  return total / (kf * lf);
}

inline double max_abs_diff(const Vec<double>& a, const Vec<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
