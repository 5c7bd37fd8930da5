#pragma once

// Deterministic sample points: a Halton sequence with a seeded
// Cranley-Patterson rotation, kept off the box boundary by a relative margin.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "lalg/error.hpp"
#include "lalg/field.hpp"

namespace lalg {

inline constexpr std::size_t kDefaultSamples = 64;
inline constexpr double kDefaultMargin = 0.01;

/// Seeded generator; doubles are built from the top 53 bits so results do
/// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(unit() * static_cast<double>(n)) % n; }

  Vec<double> vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    Vec<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

  Mat<double> matrix(std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Mat<double> m(r, c);
    for (auto& x : m.data) x = uniform(lo, hi);
    return m;
  }

 private:
  std::mt19937_64 engine_;
};

/// Radical inverse of `index` in base `base`.
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

inline std::uint64_t nth_prime(std::size_t k) {
  static constexpr std::array<std::uint64_t, 16> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (k >= primes.size()) throw ShapeError("sampling supports at most 16 coordinates");
  return primes[k];
}

/// `count` points strictly inside `box`, at least `margin` (relative to each
/// edge length) away from every face.
inline std::vector<Vec<double>> sample_points(const Box& box, std::size_t count, std::uint64_t seed,
                                              double margin = kDefaultMargin) {
  if (!(margin >= 0.0 && margin < 0.5)) throw ValidationError("sampling margin must lie in [0, 0.5)");
  Rng rng(seed);
  Vec<double> shift = rng.vector(box.dim(), 0.0, 1.0);
  std::vector<Vec<double>> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec<double> p(box.dim());
    for (std::size_t d = 0; d < box.dim(); ++d) {
      double u = radical_inverse(i + 1, nth_prime(d)) + shift[d];
      u -= std::floor(u);
      const auto& iv = box[d];
      double w = iv.hi - iv.lo;
      p[d] = iv.lo + w * (margin + (1.0 - 2.0 * margin) * u);
      // Keep strictly interior even for margin 0.
      if (!(p[d] > iv.lo)) p[d] = std::nextafter(iv.lo, iv.hi);
      if (!(p[d] < iv.hi)) p[d] = std::nextafter(iv.hi, iv.lo);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace lalg
