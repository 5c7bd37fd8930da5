#pragma once

// Invariant suites run over scenario instances. Each suite visits the
// instances it applies to, records one defect per check and sample, and
// keeps the worst value plus the failing samples. Instance errors are caught
// and recorded so that one bad instance never hides the rest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lalg/algebroid.hpp"
#include "lalg/connect.hpp"
#include "lalg/forms.hpp"
#include "lalg/polynomial.hpp"
#include "lalg/prolong.hpp"
#include "lalg/sampling.hpp"
#include "lalg/scenario.hpp"
#include "lalg/towers.hpp"

namespace lalg {

struct Failure {
  std::string instance;
  std::string check;
  Vec<double> point;
  double defect = 0.0;
};

struct SuiteResult {
  static constexpr std::size_t kMaxListedFailures = 8;

  std::string name;
  double tolerance = 0.0;
  std::size_t checks = 0;
  std::size_t instances = 0;
  double max_defect = 0.0;  // +inf when some defect was not finite
  std::string worst_instance;
  std::string worst_check;
  Vec<double> worst_point;
  std::size_t failing_count = 0;
  std::vector<Failure> failing;  // first kMaxListedFailures, in evaluation order
  std::vector<std::string> errors;

  bool pass() const { return errors.empty() && max_defect <= tolerance; }

  void record(const std::string& instance, const std::string& check, double defect, const Vec<double>& point) {
    ++checks;
    const double d = std::isfinite(defect) ? defect : std::numeric_limits<double>::infinity();
    if (checks == 1 || d > max_defect) {
      max_defect = d;
      worst_instance = instance;
      worst_check = check;
      worst_point = point;
    }
    if (!(d <= tolerance)) {
      ++failing_count;
      if (failing.size() < kMaxListedFailures) failing.push_back({instance, check, point, d});
    }
  }
};

/// Sampling plan handed to each suite.
struct SuiteEnv {
  std::uint64_t seed = 1;
  std::size_t samples = kDefaultSamples;
  double margin = kDefaultMargin;

  std::vector<Vec<double>> points(const Box& box) const { return sample_points(box, samples, seed, margin); }

  /// Generator for random test data, distinct per (suite, instance).
  Rng rng(const std::string& suite, const std::string& instance) const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : suite + "/" + instance) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return Rng(seed ^ h);
  }
};

namespace suites {

using Recorder = std::function<void(const std::string&, double, const Vec<double>&)>;

inline Section random_section(Rng& rng, const Box& base, std::size_t n, int degree = 2) {
  return random_poly_vector_field(rng, base, n, degree);
}

inline ModuleSection random_module(Rng& rng, const Prolongation& prol, bool vertical = false, std::size_t terms = 2) {
  std::vector<ProjectableSection> gens;
  for (std::size_t i = 0; i < terms; ++i) {
    auto z = random_poly_vector_field(rng, prol.total(), prol.fiber_dim(), 2);
    gens.push_back(vertical ? vertical_lift(prol, z)
                            : make_projectable(prol, random_section(rng, prol.fibration().base, prol.alg_dim()), z));
  }
  return ModuleSection(random_poly_vector_field(rng, prol.total(), terms, 1), std::move(gens));
}

inline FormArgs<double> random_args(Rng& rng, std::size_t k, std::size_t n) {
  FormArgs<double> args;
  for (std::size_t i = 0; i < k; ++i) args.push_back(rng.vector(n));
  return args;
}

inline double relative(const Vec<double>& value, const Vec<double>& reference) {
  return max_abs(value - reference) / std::max(1.0, max_abs(reference));
}

/// Central difference of f along v; plain doubles only.
template <class F>
auto central(const F& f, const Vec<double>& x, const Vec<double>& v, double h = 1e-6) {
  Vec<double> xp(x), xm(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] += h * v[i];
    xm[i] -= h * v[i];
  }
  auto p = f(xp);
  auto m = f(xm);
  return (1.0 / (2.0 * h)) * (p - m);
}

inline Vec<double> flatten(const Mat<double>& m) { return m.data; }
inline Vec<double> flatten(const Bilinear<double>& b) { return b.data; }
inline Vec<double> flatten(const Vec<double>& v) { return v; }

// --- jets-fd -------------------------------------------------------------------------------

template <template <class> class V>
void jets_fd_field(const Field<V>& f, const std::string& label, const Vec<double>& x, Rng& rng, const Recorder& rec) {
  const std::size_t d = f.dim();
  auto u = rng.vector(d);
  auto v = rng.vector(d);
  auto plain = [&f](const Vec<double>& y) { return flatten(f(y)); };
  auto jet = flatten(directional(f, x, v));
  rec(label + "/first", relative(jet, central(plain, x, v)), x);
  auto first_along_v = [&f, &v](const Vec<double>& y) { return flatten(directional_at(f, y, v)); };
  auto second = flatten(second_directional(f, x, u, v));
  rec(label + "/second", relative(second, central(first_along_v, x, u)), x);
}

inline void jets_fd_algebroid(const LocalAlgebroid& alg, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  auto a = random_section(rng, alg.base(), alg.fiber_dim());
  auto b = random_section(rng, alg.base(), alg.fiber_dim());
  auto br = alg.bracket(a, b);
  for (const auto& x : env.points(alg.base())) {
    jets_fd_field(alg.anchor(), "anchor", x, rng, rec);
    jets_fd_field(alg.structure(), "structure", x, rng, rec);
    // The bracket already spends one jet level, so only its first derivative is checked.
    auto v = rng.vector(x.size());
    auto plain = [&br](const Vec<double>& y) { return br(y); };
    rec("bracket/first", relative(directional(br, x, v), central(plain, x, v)), x);
  }
}

inline void jets_fd(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  if (inst.algebroid) jets_fd_algebroid(*inst.algebroid, env, rng, rec);
  if (inst.prolongation) jets_fd_algebroid(inst.prolongation->derived(), env, rng, rec);
  if (inst.connection) {
    const auto& f = inst.connection->christoffel();
    for (const auto& p : env.points(f.domain())) jets_fd_field(f, "christoffel", p, rng, rec);
  }
}

// --- bracket axioms ------------------------------------------------------------------------

inline void bracket_axioms_of(const LocalAlgebroid& alg, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const BracketContext ctx = alg;
  const std::size_t n = alg.fiber_dim();
  std::vector<Section> secs;
  for (int i = 0; i < 4; ++i) secs.push_back(random_section(rng, alg.base(), n));
  auto f = random_poly_scalar_field(rng, alg.base(), 2);
  std::size_t i = 0;
  for (const auto& x : env.points(alg.base())) {
    const auto& a = secs[(2 * i) % 4];
    const auto& b = secs[(2 * i + 1) % 4];
    ++i;
    rec("antisymmetry", max_abs(ctx(a, b)(x) + ctx(b, a)(x)), x);
    rec("leibniz", max_abs(leibniz_defect(ctx, a, b, f, x)), x);
    rec("jet-dependence", jet_dependence_defect(ctx, a, x), x);
  }
}

inline void bracket_axioms(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  if (inst.algebroid) bracket_axioms_of(*inst.algebroid, env, rng, rec);
  if (inst.prolongation) bracket_axioms_of(inst.prolongation->derived(), env, rng, rec);
}

// --- jacobi ---------------------------------------------------------------------------------

inline void jacobi(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& alg = *inst.algebroid;
  const BracketContext ctx = alg;
  const std::size_t n = alg.fiber_dim();
  auto a1 = random_section(rng, alg.base(), n);
  auto a2 = random_section(rng, alg.base(), n);
  auto a3 = random_section(rng, alg.base(), n);
  std::vector<Section> frame;
  for (std::size_t k = 0; k < std::min<std::size_t>(n, 3); ++k) frame.push_back(constant_section(ctx, basis<double>(n, k)));
  for (const auto& x : env.points(alg.base())) {
    rec("jacobiator", max_abs(jacobiator(ctx, a1, a2, a3, x)), x);
    if (frame.size() == 3) rec("jacobiator/frame", max_abs(jacobiator(ctx, frame[0], frame[1], frame[2], x)), x);
    rec("anchor-morphism", max_abs(anchor_morphism_defect(ctx, a1, a2, x)), x);
  }
}

// --- forms ----------------------------------------------------------------------------------

inline void forms(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& alg = *inst.algebroid;
  const BracketContext ctx = alg;
  const std::size_t n = alg.fiber_dim();
  auto f = random_poly_scalar_field(rng, alg.base(), 3);
  auto w = random_form(rng, alg.base(), n, 1);
  auto z = random_form(rng, alg.base(), n, 1);
  auto df = d_rho_fn(ctx, f);
  auto df_generic = exterior_derivative(ctx, function_form(f, n));
  auto dw = exterior_derivative(ctx, w);
  auto dz = exterior_derivative(ctx, z);
  // d(f w) = df ∧ w + f dw and d(w ∧ z) = dw ∧ z - w ∧ dz.
  auto fw = wedge(function_form(f, n), w);
  auto lhs0 = exterior_derivative(ctx, fw);
  auto rhs0 = add(wedge(df_generic, w), wedge(function_form(f, n), dw));
  auto wz = wedge(w, z);
  auto lhs1 = n >= 3 ? exterior_derivative(ctx, wz) : KForm();
  auto rhs1 = n >= 3 ? subtract(wedge(dw, z), wedge(w, dz)) : KForm();
  // d^2 = 0 is a consequence of the Jacobi identity and is only asked of instances claiming it.
  const bool jacobi = alg.claims_jacobi();
  auto ddf = jacobi && n >= 2 ? exterior_derivative(ctx, df) : KForm();
  auto ddw = jacobi && n >= 3 ? exterior_derivative(ctx, dw) : KForm();
  for (const auto& x : env.points(alg.base())) {
    auto v1 = random_args(rng, 1, n);
    rec("d-on-functions", std::abs(df(x, v1) - df_generic(x, v1)), x);
    if (n >= 2) {
      auto v2 = random_args(rng, 2, n);
      rec("wedge-leibniz/0", std::abs(lhs0(x, v2) - rhs0(x, v2)), x);
      if (jacobi) rec("d-squared/0", std::abs(ddf(x, v2)), x);
    }
    if (n >= 3) {
      auto v3 = random_args(rng, 3, n);
      rec("wedge-leibniz/1", std::abs(lhs1(x, v3) - rhs1(x, v3)), x);
      if (jacobi) rec("d-squared/1", std::abs(ddw(x, v3)), x);
    }
  }
}

// --- forms-algebra --------------------------------------------------------------------------

inline void forms_algebra(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& alg = *inst.algebroid;
  const std::size_t n = alg.fiber_dim();
  const Box& base = alg.base();
  auto w = random_form(rng, base, n, 1);
  auto z = random_form(rng, base, n, 1);
  auto u = random_form(rng, base, n, 1);
  auto a = random_section(rng, base, n);
  auto wz = wedge(w, z);
  auto zw = wedge(z, w);
  auto left = n >= 3 ? wedge(wz, u) : KForm();
  auto right = n >= 3 ? wedge(w, wedge(z, u)) : KForm();
  // i_a(w ∧ z) = (i_a w) z - w (i_a z).
  auto ins = insert(a, wz);
  auto ins_rhs = subtract(wedge(insert(a, w), z), wedge(w, insert(a, z)));
  for (const auto& x : env.points(base)) {
    rec("axioms", form_axiom_defect(wz, x, rng), x);
    if (n >= 2) {
      auto v2 = random_args(rng, 2, n);
      rec("graded-commutativity", std::abs(wz(x, v2) + zw(x, v2)), x);
    }
    if (n >= 3) {
      auto v3 = random_args(rng, 3, n);
      rec("associativity", std::abs(left(x, v3) - right(x, v3)), x);
    }
    auto v1 = random_args(rng, 1, n);
    rec("insertion-antiderivation", std::abs(ins(x, v1) - ins_rhs(x, v1)), x);
  }
}

// --- de Rham finite-difference oracle ------------------------------------------------------

/// Koszul formula on the constant frame with finite-difference anchor derivatives:
/// dw(e_i, e_j) = rho e_i (w(e_j)) - rho e_j (w(e_i)) - w(C(e_i, e_j)).
inline void de_rham(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& alg = *inst.algebroid;
  const BracketContext ctx = alg;
  const std::size_t n = alg.fiber_dim();
  auto f = random_poly_scalar_field(rng, alg.base(), 3);
  auto w = random_form(rng, alg.base(), n, 1);
  auto df = d_rho_fn(ctx, f);
  auto dw = exterior_derivative(ctx, w);
  auto e = [n](std::size_t i) { return basis<double>(n, i); };
  auto along = [&](std::size_t j) {
    return [&w, &e, j](const Vec<double>& y) { return Vec<double>{w(y, {e(j)})}; };
  };
  for (const auto& x : env.points(alg.base())) {
    auto rho = alg.anchor()(x);
    auto c = alg.structure()(x);
    auto fv = [&f](const Vec<double>& y) { return Vec<double>{f(y)}; };
    for (std::size_t i = 0; i < n; ++i) {
      double fd = central(fv, x, rho * e(i))[0];
      rec("d-function", std::abs(df(x, {e(i)}) - fd) / std::max(1.0, std::abs(fd)), x);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double fd = central(along(j), x, rho * e(i))[0] - central(along(i), x, rho * e(j))[0] -
                    w(x, {apply(c, e(i), e(j))});
        rec("d-one-form", std::abs(dw(x, {e(i), e(j)}) - fd) / std::max(1.0, std::abs(fd)), x);
      }
  }
}

// --- endomorphisms --------------------------------------------------------------------------

inline void endomorphism(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& alg = *inst.algebroid;
  const BracketContext ctx = alg;
  const std::size_t n = alg.fiber_dim();
  auto endo = random_poly_matrix_field(rng, alg.base(), n, n, 1);
  auto a = random_section(rng, alg.base(), n);
  auto b = random_section(rng, alg.base(), n);
  auto f = random_poly_scalar_field(rng, alg.base(), 2);
  auto fa = scale(f, a);
  auto fb = scale(f, b);
  auto id = constant<Mat>(alg.base(), Mat<double>::identity(n));
  // A constant complex structure, on which both Nijenhuis variants agree.
  std::optional<EndoField> complex;
  if (n % 2 == 0) {
    Mat<double> j(n, n);
    for (std::size_t k = 0; k < n; k += 2) {
      j(k, k + 1) = -1.0;
      j(k + 1, k) = 1.0;
    }
    complex = constant<Mat>(alg.base(), j);
  }
  const auto general = NijenhuisVariant::general;
  for (const auto& x : env.points(alg.base())) {
    const double fx = f(x);
    auto nab = nijenhuis(ctx, endo, a, b, x, general);
    rec("nijenhuis/tensorial-first", max_abs(nijenhuis(ctx, endo, fa, b, x, general) - fx * nab), x);
    rec("nijenhuis/tensorial-second", max_abs(nijenhuis(ctx, endo, a, fb, x, general) - fx * nab), x);
    rec("nijenhuis/identity", max_abs(nijenhuis(ctx, id, a, b, x, general)), x);
    rec("lie-derivative/tensorial",
        max_abs(lie_derivative_endo(ctx, endo, a, fb, x) - fx * lie_derivative_endo(ctx, endo, a, b, x)), x);
    if (complex) {
      rec("nijenhuis/variants-agree",
          max_abs(nijenhuis(ctx, *complex, a, b, x) - nijenhuis(ctx, *complex, a, b, x, general)), x);
    }
  }
}

// --- morphisms ------------------------------------------------------------------------------

inline void morphism(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& alg = *inst.algebroid;
  const BracketContext ctx = alg;
  const std::size_t n = alg.fiber_dim();
  auto id = identity_morphism(alg.base(), n);
  auto a1 = random_section(rng, alg.base(), n);
  auto a2 = random_section(rng, alg.base(), n);
  auto f = random_poly_scalar_field(rng, alg.base(), 2);
  auto w = random_form(rng, alg.base(), n, 1);
  for (const auto& x : env.points(alg.base())) {
    auto lm = lie_morphism_defect(ctx, ctx, id, {a1, a2}, {a1, a2}, x);
    rec("identity/lm1", lm.lm1_max(), x);
    rec("identity/related", lm.rs_max(), x);
    rec("identity/lm2", lm.lm2_max(), x);
    auto lam = lam_defect(ctx, ctx, id, f, w, x);
    rec("identity/lam1", lam.lam1_max(), x);
    rec("identity/lam2", lam.lam2_max(), x);
  }
}

// --- prolongation ---------------------------------------------------------------------------

inline void prolongation(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& prol = *inst.prolongation;
  const bool jacobi = prol.algebroid().claims_jacobi();
  auto x = random_module(rng, prol);
  auto y = random_module(rng, prol);
  auto z1 = random_module(rng, prol, true);
  auto z2 = random_module(rng, prol, true);
  std::size_t i = 0;
  for (const auto& p : env.points(prol.total())) {
    rec("module-bracket", max_abs(module_bracket_defect(prol, x, y, p)), p);
    rec("vertical-independence", vertical_independence_defect(prol, z1, z2, p).max(), p);
    auto k = kernel_identity(prol, p);
    const double expected = static_cast<double>(k.base_nullity + k.fiber_dim);
    rec("kernel/projected", std::abs(static_cast<double>(k.projected_nullity) - expected), p);
    rec("kernel/hat", std::abs(static_cast<double>(k.hat_nullity) - static_cast<double>(k.base_nullity)), p);
    if (jacobi) {
      rec("hat-anchor-morphism", max_abs(hat_anchor_morphism_defect(prol, x, y, p)), p);
      // Iterated module brackets are the costliest probe; a few points suffice.
      if (i < 8) rec("module-jacobiator", max_abs(module_jacobiator(prol, x, y, z1, p)), p);
    }
    ++i;
  }
}

// --- connections ----------------------------------------------------------------------------

inline void connection(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& conn = *inst.connection;
  const auto& prol = conn.prolongation();
  const std::size_t n = prol.alg_dim();
  const std::size_t e = prol.fiber_dim();
  auto block = random_poly_matrix_field(rng, prol.total(), e, n, 1);
  SemiBasicTensor u{MatrixField(prol.total(), [block, n, e](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    auto b = block(p);
    Mat<S> r(n + e, n + e);
    for (std::size_t k = 0; k < e; ++k)
      for (std::size_t j = 0; j < n; ++j) r(n + k, j) = b(k, j);
    return r;
  })};
  auto moved = apply(conn, u, env.samples, env.seed);
  auto diff = semi_basic_difference(conn, moved, env.samples, env.seed);
  for (const auto& p : env.points(prol.total())) {
    auto d = connection_defects(conn, p);
    rec("involution", d.involution, p);
    rec("projectors", d.projectors, p);
    rec("vertical-range", d.vertical_range, p);
    rec("vertical-kernel", d.vertical_kernel, p);
    rec("split-round-trip", d.split_round_trip, p);
    rec("semi-basic-round-trip", max_abs(diff.eval(p) - u.eval(p)), p);
  }
}

// --- towers ---------------------------------------------------------------------------------

inline void tower_laws(const Instance& inst, const SuiteEnv& env, Rng&, const Recorder& rec) {
  const auto& tower = *inst.tower;
  std::vector<CheckResult> rs{check_bonding_laws(tower, env.samples, env.seed)};
  rs.push_back(check_anchored_sequence(tower, env.samples, env.seed).front());
  for (auto& r : check_prolong_compat(tower, env.samples, env.seed)) rs.push_back(std::move(r));
  if (tower.kind() == TowerKind::direct) {
    for (auto& r : check_direct_sequence(tower, env.samples, env.seed)) rs.push_back(std::move(r));
  }
  for (const auto& r : rs) rec(r.where.empty() ? r.check : r.check + " " + r.where, r.defect, r.point);
}

inline void tower_brackets(const Instance& inst, const SuiteEnv& env, Rng& rng, const Recorder& rec) {
  const auto& tower = *inst.tower;
  auto brk = check_anchored_sequence(tower, env.samples, env.seed).back();
  rec(brk.where.empty() ? brk.check : brk.check + " " + brk.where, brk.defect, brk.point);
  const std::size_t pairs = std::min<std::size_t>(env.samples, 32);
  for (std::size_t k = 0; k + 1 < tower.size(); ++k) {
    const auto& src = tower.level(tower.source_of(k, k + 1));
    const auto& tgt = tower.level(tower.target_of(k, k + 1));
    const std::string where = " " + detail::levels_label(k, k + 1);
    auto pts = env.points(src.total());
    for (std::size_t i = 0; i < pairs && i < pts.size(); ++i) {
      auto related = [&]() {
        if (tower.kind() == TowerKind::direct) return random_module(rng, src);
        auto xt = random_module(rng, tgt);
        std::vector<std::pair<Section, VectorField>> kernel;
        for (std::size_t g = 0; g < xt.size(); ++g) {
          kernel.emplace_back(random_section(rng, src.fibration().base, src.alg_dim()),
                              random_poly_vector_field(rng, src.total(), src.fiber_dim(), 2));
        }
        return related_preimage(tower, k, xt, kernel);
      };
      auto xs = related();
      auto ys = related();
      auto d = limit_bracket_defect(tower, k, xs, ys, pts[i]);
      rec("limit-bracket/related" + where, d.rs, pts[i]);
      rec("limit-bracket/bracket" + where, d.bracket_max(), pts[i]);
    }
  }
}

}  // namespace suites

struct SuiteDef {
  std::string name;
  std::vector<InstanceKind> kinds;
  void (*run)(const Instance&, const SuiteEnv&, Rng&, const suites::Recorder&);
};

inline const std::vector<SuiteDef>& suite_registry() {
  using K = InstanceKind;
  static const std::vector<SuiteDef> reg{
      {"jets-fd", {K::algebroid, K::prolongation, K::connection}, suites::jets_fd},
      {"bracket-axioms", {K::algebroid, K::prolongation}, suites::bracket_axioms},
      {"jacobi", {K::algebroid}, suites::jacobi},
      {"forms", {K::algebroid}, suites::forms},
      {"forms-algebra", {K::algebroid}, suites::forms_algebra},
      {"de-rham", {K::algebroid}, suites::de_rham},
      {"endomorphism", {K::algebroid}, suites::endomorphism},
      {"morphism", {K::algebroid}, suites::morphism},
      {"prolongation", {K::prolongation}, suites::prolongation},
      {"connection", {K::connection}, suites::connection},
      {"tower-laws", {K::tower}, suites::tower_laws},
      {"tower-brackets", {K::tower}, suites::tower_brackets},
  };
  return reg;
}

/// Runs one suite over every applicable instance, in declaration order.
inline SuiteResult run_suite(const Scenario& scenario, const SuiteSpec& spec, const SuiteEnv& env) {
  const SuiteDef* def = nullptr;
  for (const auto& d : suite_registry())
    if (d.name == spec.name) def = &d;
  if (!def) throw ConfigError("/suites", "unknown suite '" + spec.name + "'");
  SuiteResult r;
  r.name = spec.name;
  r.tolerance = spec.tolerance;
  for (const auto& inst : scenario.instances) {
    if (std::find(def->kinds.begin(), def->kinds.end(), inst.kind) == def->kinds.end()) continue;
    if (!spec.instances.empty() &&
        std::find(spec.instances.begin(), spec.instances.end(), inst.name) == spec.instances.end()) {
      continue;
    }
    ++r.instances;
    auto rng = env.rng(spec.name, inst.name);
    suites::Recorder rec = [&r, &inst](const std::string& check, double defect, const Vec<double>& point) {
      r.record(inst.name, check, defect, point);
    };
    try {
      def->run(inst, env, rng, rec);
    } catch (const std::exception& e) {
      r.errors.push_back(inst.name + ": " + e.what());
    }
  }
  return r;
}

}  // namespace lalg
