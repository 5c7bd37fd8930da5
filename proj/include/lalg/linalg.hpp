#pragma once

// Small dense containers generic over the scalar kind (double or jets), and
// the handful of operations the geometry layers need. Sizes here are desk
// scale (≤ 12), so everything is row-major std::vector storage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lalg/error.hpp"
#include "lalg/jet.hpp"

namespace lalg {

template <class S>
using Vec = std::vector<S>;

/// Identity alias so scalar-valued fields fit the same `template <class> class V` slot.
template <class S>
using Value = S;

template <class S>
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<S> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, S(0.0)) {}

  S& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const S& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1.0);
    return m;
  }
};

/// Bilinear map B: R^in1 x R^in2 -> R^out, stored as B(k; i, j) = B(e_i, e_j)_k.
template <class S>
struct Bilinear {
  std::size_t out = 0;
  std::size_t in1 = 0;
  std::size_t in2 = 0;
  std::vector<S> data;

  Bilinear() = default;
  Bilinear(std::size_t o, std::size_t a, std::size_t b) : out(o), in1(a), in2(b), data(o * a * b, S(0.0)) {}

  S& operator()(std::size_t k, std::size_t i, std::size_t j) { return data[(k * in1 + i) * in2 + j]; }
  const S& operator()(std::size_t k, std::size_t i, std::size_t j) const {
    return data[(k * in1 + i) * in2 + j];
  }
};

// ---------------------------------------------------------------------------
// Elementwise mapping over any value container.

template <Scalar S, class F>
auto fmap(const S& s, F&& f) {
  return f(s);
}
template <Scalar S, class F>
auto fmap(const Vec<S>& v, F&& f) {
  using T = decltype(f(v[0]));
  Vec<T> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(f(x));
  return out;
}
template <Scalar S, class F>
auto fmap(const Mat<S>& m, F&& f) {
  using T = decltype(f(S{}));
  Mat<T> out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = f(m.data[i]);
  return out;
}
template <Scalar S, class F>
auto fmap(const Bilinear<S>& b, F&& f) {
  using T = decltype(f(S{}));
  Bilinear<T> out(b.out, b.in1, b.in2);
  for (std::size_t i = 0; i < b.data.size(); ++i) out.data[i] = f(b.data[i]);
  return out;
}

/// Drop derivative parts.
template <class V>
auto primal_of(const V& value) {
  return fmap(value, [](const auto& s) { return primal(s); });
}

template <class To, class V>
auto embed_all(const V& value) {
  return fmap(value, [](const auto& s) { return embed<To>(s); });
}

// ---------------------------------------------------------------------------
// Vector arithmetic.

template <Scalar S>
Vec<S> zeros(std::size_t n) {
  return Vec<S>(n, S(0.0));
}

template <Scalar S>
Vec<S> basis(std::size_t n, std::size_t k) {
  Vec<S> v(n, S(0.0));
  v[k] = S(1.0);
  return v;
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": size " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

template <Scalar S>
Vec<S> operator+(const Vec<S>& a, const Vec<S>& b) {
  require_same_size(a.size(), b.size(), "vector sum");
  Vec<S> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

template <Scalar S>
Vec<S> operator-(const Vec<S>& a, const Vec<S>& b) {
  require_same_size(a.size(), b.size(), "vector difference");
  Vec<S> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

template <Scalar S>
Vec<S> operator*(const S& s, const Vec<S>& a) {
  Vec<S> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

template <Scalar S>
Vec<S> operator*(const Mat<S>& m, const Vec<S>& v) {
  require_same_size(m.cols, v.size(), "matrix-vector product");
  Vec<S> r(m.rows, S(0.0));
  for (std::size_t i = 0; i < m.rows; ++i) {
    S acc(0.0);
    for (std::size_t j = 0; j < m.cols; ++j) acc += m(i, j) * v[j];
    r[i] = acc;
  }
  return r;
}

template <Scalar S>
Mat<S> operator*(const Mat<S>& a, const Mat<S>& b) {
  require_same_size(a.cols, b.rows, "matrix product");
  Mat<S> r(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      S acc(0.0);
      for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, j);
      r(i, j) = acc;
    }
  return r;
}

template <Scalar S>
Mat<S> operator+(const Mat<S>& a, const Mat<S>& b) {
  require_same_size(a.rows, b.rows, "matrix sum rows");
  require_same_size(a.cols, b.cols, "matrix sum cols");
  Mat<S> r(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) r.data[i] = a.data[i] + b.data[i];
  return r;
}

template <Scalar S>
Mat<S> operator-(const Mat<S>& a, const Mat<S>& b) {
  require_same_size(a.rows, b.rows, "matrix difference rows");
  require_same_size(a.cols, b.cols, "matrix difference cols");
  Mat<S> r(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) r.data[i] = a.data[i] - b.data[i];
  return r;
}

template <Scalar S>
Mat<S> operator*(const S& s, const Mat<S>& a) {
  Mat<S> r(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) r.data[i] = s * a.data[i];
  return r;
}

template <Scalar S>
Mat<S> transpose(const Mat<S>& a) {
  Mat<S> r(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) r(j, i) = a(i, j);
  return r;
}

template <Scalar S>
Vec<S> apply(const Bilinear<S>& b, const Vec<S>& u, const Vec<S>& w) {
  require_same_size(b.in1, u.size(), "bilinear first slot");
  require_same_size(b.in2, w.size(), "bilinear second slot");
  Vec<S> r(b.out, S(0.0));
  for (std::size_t k = 0; k < b.out; ++k) {
    S acc(0.0);
    for (std::size_t i = 0; i < b.in1; ++i)
      for (std::size_t j = 0; j < b.in2; ++j) acc += b(k, i, j) * u[i] * w[j];
    r[k] = acc;
  }
  return r;
}

/// Block matrix [[a, b], [c, d]].
template <Scalar S>
Mat<S> block(const Mat<S>& a, const Mat<S>& b, const Mat<S>& c, const Mat<S>& d) {
  require_same_size(a.rows, b.rows, "block top rows");
  require_same_size(c.rows, d.rows, "block bottom rows");
  require_same_size(a.cols, c.cols, "block left cols");
  require_same_size(b.cols, d.cols, "block right cols");
  Mat<S> r(a.rows + c.rows, a.cols + b.cols);
  for (std::size_t i = 0; i < r.rows; ++i)
    for (std::size_t j = 0; j < r.cols; ++j) {
      bool top = i < a.rows;
      bool left = j < a.cols;
      std::size_t ii = top ? i : i - a.rows;
      std::size_t jj = left ? j : j - a.cols;
      r(i, j) = top ? (left ? a(ii, jj) : b(ii, jj)) : (left ? c(ii, jj) : d(ii, jj));
    }
  return r;
}

template <Scalar S>
Vec<S> concat(const Vec<S>& a, const Vec<S>& b) {
  Vec<S> r(a);
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

template <Scalar S>
Vec<S> slice(const Vec<S>& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.size()) throw ShapeError("slice out of range");
  return Vec<S>(a.begin() + static_cast<std::ptrdiff_t>(begin),
                a.begin() + static_cast<std::ptrdiff_t>(begin + count));
}

// ---------------------------------------------------------------------------
// Norms (max-abs everywhere; defects are reported componentwise).

inline double max_abs(double x) { return std::abs(x); }
inline double max_abs(const Vec<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}
inline double max_abs(const Mat<double>& a) { return max_abs(a.data); }
inline double max_abs(const Bilinear<double>& a) { return max_abs(a.data); }

// ---------------------------------------------------------------------------
// Rank-revealing factorization and inverses.

inline Eigen::MatrixXd to_eigen(const Mat<double>& a) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols));
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
  return m;
}

inline Mat<double> from_eigen(const Eigen::MatrixXd& m) {
  Mat<double> a(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) a(i, j) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return a;
}

struct RankInfo {
  std::size_t rank = 0;
  std::size_t nullity = 0;  // dimension of the kernel in the domain
  double sigma_max = 0.0;
  double sigma_min_kept = 0.0;
  bool near_cutoff = false;  // a singular value sits within 1e3 of the cutoff
};

/// Singular values at or below rel_cutoff * sigma_max count as zero.
inline RankInfo rank_info(const Mat<double>& a, double rel_cutoff = 1e-10) {
  RankInfo info;
  if (a.rows == 0 || a.cols == 0) {
    info.nullity = a.cols;
    return info;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
  const auto& sv = svd.singularValues();
  info.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  double cutoff = rel_cutoff * info.sigma_max;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    double s = sv(i);
    if (info.sigma_max > 0.0 && s > cutoff) {
      ++info.rank;
      info.sigma_min_kept = s;
    }
    if (info.sigma_max > 0.0 && s > cutoff * 1e-3 && s < cutoff * 1e3) info.near_cutoff = true;
  }
  info.nullity = a.cols - info.rank;
  return info;
}

/// Moore-Penrose pseudo-inverse of a constant matrix.
inline Mat<double> pseudo_inverse(const Mat<double>& a) {
  if (a.rows == 0 || a.cols == 0) return Mat<double>(a.cols, a.rows);
  return from_eigen(to_eigen(a).completeOrthogonalDecomposition().pseudoInverse());
}

/// Solve A X = B by Gauss-Jordan elimination with partial pivoting on the
/// primal parts; works for any scalar kind.
template <Scalar S>
Mat<S> solve(Mat<S> a, Mat<S> b) {
  require_same_size(a.rows, a.cols, "solve: square system");
  require_same_size(a.rows, b.rows, "solve: right-hand side");
  const std::size_t n = a.rows;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(primal(a(r, col))) > std::abs(primal(a(piv, col)))) piv = r;
    if (primal(a(piv, col)) == 0.0) throw DomainError("solve: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      for (std::size_t j = 0; j < b.cols; ++j) std::swap(b(col, j), b(piv, j));
    }
    S inv = S(1.0) / a(col, col);
    for (std::size_t j = 0; j < n; ++j) a(col, j) = a(col, j) * inv;
    for (std::size_t j = 0; j < b.cols; ++j) b(col, j) = b(col, j) * inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      S f = a(r, col);
      if (primal(f) == 0.0 && jet_depth_v<S> == 0) continue;
      for (std::size_t j = 0; j < n; ++j) a(r, j) = a(r, j) - f * a(col, j);
      for (std::size_t j = 0; j < b.cols; ++j) b(r, j) = b(r, j) - f * b(col, j);
    }
  }
  return b;
}

}  // namespace lalg
