#pragma once

// Forward-mode jets: a value plus one derivative seed. Nesting Jet<Jet<T>>
// carries a second, independent infinitesimal, so mixed second derivatives
// fall out of ordinary arithmetic.

#include <cmath>
#include <cstddef>
#include <type_traits>

namespace lalg {

template <class T>
struct Jet;

template <class T>
struct jet_depth : std::integral_constant<std::size_t, 0> {};
template <class T>
struct jet_depth<Jet<T>> : std::integral_constant<std::size_t, 1 + jet_depth<T>::value> {};
template <class T>
inline constexpr std::size_t jet_depth_v = jet_depth<T>::value;

template <class T>
struct is_scalar : std::is_same<T, double> {};
template <class T>
struct is_scalar<Jet<T>> : is_scalar<T> {};
template <class T>
inline constexpr bool is_scalar_v = is_scalar<T>::value;

template <class T>
concept Scalar = is_scalar_v<T>;

template <class T>
struct Jet {
  T v{};  // value
  T d{};  // derivative along the seed

  constexpr Jet() = default;
  constexpr Jet(double c) : v(c), d(0.0) {}  // NOLINT: constants promote implicitly
  constexpr Jet(const T& value) requires(!std::is_same_v<T, double>) : v(value), d(0.0) {}
  constexpr Jet(const T& value, const T& deriv) : v(value), d(deriv) {}

  friend constexpr Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d + b.d}; }
  friend constexpr Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d - b.d}; }
  friend constexpr Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.v * b.d + a.d * b.v};
  }
  friend constexpr Jet operator/(const Jet& a, const Jet& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
  }
  friend constexpr Jet operator-(const Jet& a) { return {-a.v, -a.d}; }
  friend constexpr Jet operator+(const Jet& a) { return a; }

  constexpr Jet& operator+=(const Jet& o) { return *this = *this + o; }
  constexpr Jet& operator-=(const Jet& o) { return *this = *this - o; }
  constexpr Jet& operator*=(const Jet& o) { return *this = *this * o; }
  constexpr Jet& operator/=(const Jet& o) { return *this = *this / o; }
};

using J1 = Jet<double>;
using J2 = Jet<J1>;
using J3 = Jet<J2>;

/// Evaluation routines are instantiated for double, J1, J2 and J3; one more
/// derivative is available below each of them except J3.
inline constexpr std::size_t kMaxJetDepth = 3;

template <class S>
inline constexpr bool can_differentiate_v = jet_depth_v<S> < kMaxJetDepth;

/// Innermost real value.
constexpr double primal(double x) { return x; }
template <class T>
constexpr double primal(const Jet<T>& x) {
  return primal(x.v);
}

/// Lift a scalar into a (possibly deeper) jet type with zero derivative parts.
template <class To, class From>
constexpr To embed(const From& x) {
  static_assert(jet_depth_v<To> >= jet_depth_v<From>, "cannot drop derivative information");
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else {
    using Inner = decltype(To{}.v);
    return To(embed<Inner>(x));
  }
}

// Elementary functions. Plain doubles forward to <cmath> so generic code can
// call these unqualified from inside the namespace.
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }

template <class T>
Jet<T> sin(const Jet<T>& x) {
  return {sin(x.v), cos(x.v) * x.d};
}
template <class T>
Jet<T> cos(const Jet<T>& x) {
  return {cos(x.v), -(sin(x.v) * x.d)};
}
template <class T>
Jet<T> exp(const Jet<T>& x) {
  T e = exp(x.v);
  return {e, e * x.d};
}
template <class T>
Jet<T> log(const Jet<T>& x) {
  return {log(x.v), x.d / x.v};
}
template <class T>
Jet<T> sqrt(const Jet<T>& x) {
  T r = sqrt(x.v);
  return {r, x.d / (T(2.0) * r)};
}

/// Integer power by repeated multiplication; exact for the jet path.
template <Scalar S>
S pow(const S& x, int n) {
  if (n < 0) return S(1.0) / pow(x, -n);
  S result(1.0);
  S base = x;
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

}  // namespace lalg
