#pragma once

// Polynomial fields: sums of monomials routed to output slots. This is the
// portable field format of scenario files and the source of random test
// sections, and polynomials are exact under jet differentiation.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lalg/error.hpp"
#include "lalg/field.hpp"
#include "lalg/sampling.hpp"

namespace lalg {

/// coeff * prod_i x_i^powers[i], added to the output slot `out`
/// (empty for scalars, {k} for vectors, {row, col} for matrices, {k, i, j} for bilinear maps).
struct PolyTerm {
  double coeff = 0.0;
  std::vector<int> powers;
  std::vector<std::size_t> out;
};

template <Scalar S>
S eval_monomial(double coeff, const std::vector<int>& powers, const Vec<S>& x) {
  S r(coeff);
  for (std::size_t i = 0; i < powers.size(); ++i)
    if (powers[i] != 0) r = r * pow(x[i], powers[i]);
  return r;
}

namespace detail {

inline void validate_terms(const std::vector<PolyTerm>& terms, std::size_t dim, const std::vector<std::size_t>& shape,
                           const char* what) {
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& term = terms[t];
    const std::string at = std::string(what) + " term " + std::to_string(t);
    if (term.powers.size() != dim) {
      throw ShapeError(at + ": " + std::to_string(term.powers.size()) + " powers for a " + std::to_string(dim) +
                       "-dimensional domain");
    }
    for (int p : term.powers)
      if (p < 0) throw ValidationError(at + ": negative power");
    if (term.out.size() != shape.size()) {
      throw ShapeError(at + ": output slot needs " + std::to_string(shape.size()) + " indices");
    }
    for (std::size_t i = 0; i < shape.size(); ++i)
      if (term.out[i] >= shape[i]) throw ShapeError(at + ": output index out of range");
  }
}

}  // namespace detail

inline ScalarField poly_scalar_field(Box domain, std::vector<PolyTerm> terms) {
  detail::validate_terms(terms, domain.dim(), {}, "scalar polynomial");
  return ScalarField(std::move(domain), [terms = std::move(terms)](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    S r(0.0);
    for (const auto& t : terms) r += eval_monomial(t.coeff, t.powers, x);
    return r;
  });
}

inline VectorField poly_vector_field(Box domain, std::size_t n, std::vector<PolyTerm> terms) {
  detail::validate_terms(terms, domain.dim(), {n}, "vector polynomial");
  return VectorField(std::move(domain), [n, terms = std::move(terms)](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    Vec<S> r(n, S(0.0));
    for (const auto& t : terms) r[t.out[0]] += eval_monomial(t.coeff, t.powers, x);
    return r;
  });
}

inline MatrixField poly_matrix_field(Box domain, std::size_t rows, std::size_t cols, std::vector<PolyTerm> terms) {
  detail::validate_terms(terms, domain.dim(), {rows, cols}, "matrix polynomial");
  return MatrixField(std::move(domain), [rows, cols, terms = std::move(terms)](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    Mat<S> r(rows, cols);
    for (const auto& t : terms) r(t.out[0], t.out[1]) += eval_monomial(t.coeff, t.powers, x);
    return r;
  });
}

inline BilinearField poly_bilinear_field(Box domain, std::size_t out, std::size_t in1, std::size_t in2,
                                         std::vector<PolyTerm> terms) {
  detail::validate_terms(terms, domain.dim(), {out, in1, in2}, "bilinear polynomial");
  return BilinearField(std::move(domain), [out, in1, in2, terms = std::move(terms)](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    Bilinear<S> r(out, in1, in2);
    for (const auto& t : terms) r(t.out[0], t.out[1], t.out[2]) += eval_monomial(t.coeff, t.powers, x);
    return r;
  });
}

/// Random exponent vector of total degree at most `max_degree`.
inline std::vector<int> random_powers(Rng& rng, std::size_t dim, int max_degree) {
  std::vector<int> p(dim, 0);
  int budget = static_cast<int>(rng.index(static_cast<std::size_t>(max_degree) + 1));
  for (int k = 0; k < budget && dim > 0; ++k) ++p[rng.index(dim)];
  return p;
}

/// Random polynomial terms with coefficients in [-1, 1]; every output slot gets `per_slot` terms.
inline std::vector<PolyTerm> random_terms(Rng& rng, std::size_t dim, const std::vector<std::size_t>& shape,
                                          int max_degree, std::size_t per_slot = 3) {
  std::size_t slots = 1;
  for (auto s : shape) slots *= s;
  std::vector<PolyTerm> terms;
  for (std::size_t flat = 0; flat < slots; ++flat) {
    std::vector<std::size_t> out(shape.size());
    std::size_t rem = flat;
    for (std::size_t i = shape.size(); i-- > 0;) {
      out[i] = rem % shape[i];
      rem /= shape[i];
    }
    for (std::size_t t = 0; t < per_slot; ++t) terms.push_back({rng.uniform(-1.0, 1.0), random_powers(rng, dim, max_degree), out});
  }
  return terms;
}

inline VectorField random_poly_vector_field(Rng& rng, const Box& domain, std::size_t n, int max_degree = 2) {
  return poly_vector_field(domain, n, random_terms(rng, domain.dim(), {n}, max_degree));
}

inline ScalarField random_poly_scalar_field(Rng& rng, const Box& domain, int max_degree = 2) {
  return poly_scalar_field(domain, random_terms(rng, domain.dim(), {}, max_degree));
}

inline MatrixField random_poly_matrix_field(Rng& rng, const Box& domain, std::size_t rows, std::size_t cols,
                                            int max_degree = 1) {
  return poly_matrix_field(domain, rows, cols, random_terms(rng, domain.dim(), {rows, cols}, max_degree, 2));
}

}  // namespace lalg
