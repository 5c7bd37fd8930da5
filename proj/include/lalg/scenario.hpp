#pragma once

// Scenario files: named instances (builtin or inline polynomial), the suites
// to run and the sampling plan. Every problem is reported as a ConfigError
// carrying a JSON-pointer-like location.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lalg/algebroid.hpp"
#include "lalg/connect.hpp"
#include "lalg/error.hpp"
#include "lalg/polynomial.hpp"
#include "lalg/prolong.hpp"
#include "lalg/sampling.hpp"
#include "lalg/towers.hpp"

namespace lalg {

enum class InstanceKind { algebroid, prolongation, connection, tower };

inline std::string to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::algebroid: return "algebroid";
    case InstanceKind::prolongation: return "prolongation";
    case InstanceKind::connection: return "connection";
    case InstanceKind::tower: return "tower";
  }
  return "?";
}

/// Exactly one of the optionals is set, matching `kind`.
struct Instance {
  std::string name;
  InstanceKind kind = InstanceKind::algebroid;
  std::optional<LocalAlgebroid> algebroid;
  std::optional<Prolongation> prolongation;
  std::optional<Connection> connection;
  std::optional<Tower> tower;
};

struct SuiteSpec {
  std::string name;
  double tolerance = 0.0;
  std::vector<std::string> instances;  // empty: every applicable instance
};

struct Sampling {
  std::uint64_t seed = 1;
  std::size_t count = kDefaultSamples;
  double margin = kDefaultMargin;
};

struct Scenario {
  std::string name;
  std::vector<Instance> instances;  // declaration order (file order)
  std::vector<SuiteSpec> suites;    // run order
  Sampling sampling;

  const Instance* find(const std::string& n) const {
    for (const auto& i : instances)
      if (i.name == n) return &i;
    return nullptr;
  }
};

/// Suite names in their canonical order, with default tolerances.
inline const std::vector<std::pair<std::string, double>>& suite_catalog() {
  static const std::vector<std::pair<std::string, double>> catalog{
      {"jets-fd", 1e-5},        {"bracket-axioms", 1e-9}, {"jacobi", 1e-8},       {"forms", 1e-8},
      {"forms-algebra", 1e-10}, {"de-rham", 1e-7},        {"endomorphism", 1e-8}, {"morphism", 1e-14},
      {"prolongation", 1e-9},   {"connection", 1e-12},    {"tower-laws", 1e-10},  {"tower-brackets", 1e-8}};
  return catalog;
}

inline std::optional<double> default_tolerance(const std::string& suite) {
  for (const auto& [n, t] : suite_catalog())
    if (n == suite) return t;
  return std::nullopt;
}

namespace detail {

using json = nlohmann::ordered_json;

class ScenarioParser {
 public:
  explicit ScenarioParser(const json& root) : root_(root) {}

  Scenario parse(std::string name) {
    Scenario s;
    s.name = std::move(name);
    require_object(root_, "");
    for (const auto& [key, _] : root_.items()) {
      if (key != "instances" && key != "suites" && key != "sampling" && key != "description") {
        throw ConfigError("/" + key, "unknown top-level key");
      }
    }
    if (root_.contains("sampling")) s.sampling = parse_sampling(root_["sampling"], "/sampling");
    if (!root_.contains("instances")) throw ConfigError("/instances", "missing");
    const auto& inst = root_["instances"];
    require_object(inst, "/instances");
    if (inst.empty()) throw ConfigError("/instances", "at least one instance is required");
    // Instances may reference each other in any order; resolve on demand.
    for (const auto& [key, _] : inst.items()) order_.push_back(key);
    for (const auto& key : order_) resolve(key, "/instances/" + key);
    for (const auto& key : order_) s.instances.push_back(built_.at(key));
    if (root_.contains("suites")) {
      s.suites = parse_suites(root_["suites"], "/suites", std::set<std::string>(order_.begin(), order_.end()));
    } else {
      for (const auto& [n, t] : suite_catalog()) s.suites.push_back({n, t, {}});
    }
    return s;
  }

 private:
  const json& root_;
  std::vector<std::string> order_;
  std::map<std::string, Instance> built_;
  std::set<std::string> in_progress_;

  static void require_object(const json& j, const std::string& at) {
    if (!j.is_object()) throw ConfigError(at.empty() ? "/" : at, "expected an object");
  }

  static double number(const json& j, const std::string& at) {
    if (!j.is_number()) throw ConfigError(at, "expected a number");
    return j.get<double>();
  }

  static std::size_t count(const json& j, const std::string& at) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(at, "expected a non-negative integer");
    return static_cast<std::size_t>(j.get<long long>());
  }

  static std::string text(const json& j, const std::string& at) {
    if (!j.is_string()) throw ConfigError(at, "expected a string");
    return j.get<std::string>();
  }

  static const json& field(const json& obj, const char* key, const std::string& at) {
    if (!obj.contains(key)) throw ConfigError(at + "/" + key, "missing");
    return obj[key];
  }

  static Sampling parse_sampling(const json& j, const std::string& at) {
    require_object(j, at);
    Sampling s;
    for (const auto& [key, v] : j.items()) {
      const std::string here = at + "/" + key;
      if (key == "seed") {
        s.seed = static_cast<std::uint64_t>(count(v, here));
      } else if (key == "count") {
        s.count = count(v, here);
        if (s.count < 1) throw ConfigError(here, "count must be at least 1");
      } else if (key == "margin") {
        s.margin = number(v, here);
        if (!(s.margin >= 0.0 && s.margin < 0.5)) throw ConfigError(here, "margin must lie in [0, 0.5)");
      } else {
        throw ConfigError(here, "unknown sampling key");
      }
    }
    return s;
  }

  static std::vector<SuiteSpec> parse_suites(const json& j, const std::string& at, const std::set<std::string>& known) {
    if (!j.is_array()) throw ConfigError(at, "expected an array of suite names or {name, tolerance} objects");
    std::vector<SuiteSpec> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string here = at + "/" + std::to_string(i);
      SuiteSpec s;
      if (j[i].is_string()) {
        s.name = j[i].get<std::string>();
      } else if (j[i].is_object()) {
        s.name = text(field(j[i], "name", here), here + "/name");
        if (j[i].contains("tolerance")) {
          s.tolerance = number(j[i]["tolerance"], here + "/tolerance");
          if (!(s.tolerance > 0.0)) throw ConfigError(here + "/tolerance", "tolerance must be positive");
        }
        if (j[i].contains("instances")) {
          const auto& names = j[i]["instances"];
          if (!names.is_array()) throw ConfigError(here + "/instances", "expected a list of instance names");
          for (std::size_t k = 0; k < names.size(); ++k) {
            const std::string where = here + "/instances/" + std::to_string(k);
            auto n = text(names[k], where);
            if (!known.count(n)) throw ConfigError(where, "unresolved reference '" + n + "'");
            s.instances.push_back(std::move(n));
          }
        }
      } else {
        throw ConfigError(here, "expected a suite name or object");
      }
      auto def = default_tolerance(s.name);
      if (!def) throw ConfigError(here, "unknown suite '" + s.name + "'");
      if (s.tolerance == 0.0) s.tolerance = *def;
      if (!seen.insert(s.name).second) throw ConfigError(here, "suite '" + s.name + "' listed twice");
      out.push_back(std::move(s));
    }
    if (out.empty()) throw ConfigError(at, "at least one suite is required");
    return out;
  }

  static Box parse_box(const json& j, const std::string& at) {
    require_object(j, at);
    std::size_t dim = count(field(j, "dim", at), at + "/dim");
    if (dim == 0 || dim > 16) throw ConfigError(at + "/dim", "dimension must lie in [1, 16]");
    if (!j.contains("bounds")) return Box::cube(dim);
    const auto& b = j["bounds"];
    const std::string here = at + "/bounds";
    if (!b.is_array()) throw ConfigError(here, "expected [lo, hi] or a list of [lo, hi] pairs");
    auto pair = [&](const json& p, const std::string& where) {
      if (!p.is_array() || p.size() != 2) throw ConfigError(where, "expected [lo, hi]");
      Interval iv{number(p[0], where + "/0"), number(p[1], where + "/1")};
      if (!(iv.lo < iv.hi)) throw ConfigError(where, "empty interval");
      return iv;
    };
    if (b.size() == 2 && b[0].is_number()) return Box(std::vector<Interval>(dim, pair(b, here)));
    if (b.size() != dim) throw ConfigError(here, "expected " + std::to_string(dim) + " intervals");
    std::vector<Interval> ivs;
    for (std::size_t i = 0; i < dim; ++i) ivs.push_back(pair(b[i], here + "/" + std::to_string(i)));
    return Box(std::move(ivs));
  }

  /// Terms `{coeff, powers, outIndex?, outPair?}`; the slot is assembled as [outIndex..., outPair...].
  static std::vector<PolyTerm> parse_poly(const json& j, const std::string& at, std::size_t dim,
                                          const std::vector<std::size_t>& shape, bool uses_index, bool uses_pair) {
    if (!j.is_array()) throw ConfigError(at, "expected a list of monomial terms");
    std::vector<PolyTerm> terms;
    for (std::size_t t = 0; t < j.size(); ++t) {
      const std::string here = at + "/" + std::to_string(t);
      require_object(j[t], here);
      for (const auto& [key, _] : j[t].items()) {
        if (key != "coeff" && key != "powers" && key != "outIndex" && key != "outPair") {
          throw ConfigError(here + "/" + key, "unknown term key");
        }
      }
      PolyTerm term;
      term.coeff = number(field(j[t], "coeff", here), here + "/coeff");
      const auto& p = field(j[t], "powers", here);
      if (!p.is_array() || p.size() != dim) {
        throw ConfigError(here + "/powers", "expected " + std::to_string(dim) + " non-negative integers");
      }
      for (std::size_t i = 0; i < dim; ++i) {
        term.powers.push_back(static_cast<int>(count(p[i], here + "/powers/" + std::to_string(i))));
      }
      if (uses_index) term.out.push_back(count(field(j[t], "outIndex", here), here + "/outIndex"));
      if (uses_pair) {
        const auto& q = field(j[t], "outPair", here);
        if (!q.is_array() || q.size() != 2) throw ConfigError(here + "/outPair", "expected two indices");
        term.out.push_back(count(q[0], here + "/outPair/0"));
        term.out.push_back(count(q[1], here + "/outPair/1"));
      }
      for (std::size_t i = 0; i < shape.size(); ++i) {
        if (term.out[i] >= shape[i]) throw ConfigError(here, "output index out of range");
      }
      terms.push_back(std::move(term));
    }
    return terms;
  }

  const Instance& resolve(const std::string& name, const std::string& ref_at) {
    if (auto it = built_.find(name); it != built_.end()) return it->second;
    const auto& inst = root_["instances"];
    if (!inst.contains(name)) throw ConfigError(ref_at, "unresolved reference '" + name + "'");
    if (!in_progress_.insert(name).second) throw ConfigError(ref_at, "circular reference through '" + name + "'");
    const std::string at = "/instances/" + name;
    Instance out = build(name, inst[name], at);
    in_progress_.erase(name);
    return built_.emplace(name, std::move(out)).first->second;
  }

  const Instance& reference(const json& j, const char* key, InstanceKind want, const std::string& at) {
    const std::string here = at + "/" + key;
    const auto& target = resolve(text(field(j, key, at), here), here);
    if (target.kind != want) {
      throw ConfigError(here, "'" + target.name + "' is a " + to_string(target.kind) + ", expected a " + to_string(want));
    }
    return target;
  }

  Instance build(const std::string& name, const json& j, const std::string& at) {
    require_object(j, at);
    const std::string kind = text(field(j, "kind", at), at + "/kind");
    Instance out;
    out.name = name;
    try {
      if (kind == "algebroid") {
        out.kind = InstanceKind::algebroid;
        out.algebroid = build_algebroid(name, j, at);
      } else if (kind == "prolongation") {
        out.kind = InstanceKind::prolongation;
        out.prolongation = build_prolongation(j, at);
      } else if (kind == "connection") {
        out.kind = InstanceKind::connection;
        out.connection = build_connection(j, at);
      } else if (kind == "tower") {
        out.kind = InstanceKind::tower;
        out.tower = build_tower(j, at);
      } else {
        throw ConfigError(at + "/kind", "unknown kind '" + kind + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      // Library validation (antisymmetry, shapes, boxes) surfaces at the instance.
      throw ConfigError(at, e.what());
    }
    return out;
  }

  LocalAlgebroid build_algebroid(const std::string& name, const json& j, const std::string& at) {
    if (j.contains("builtin")) {
      const auto b = text(j["builtin"], at + "/builtin");
      if (j.contains("base")) {
        Box box = parse_box(j["base"], at + "/base");
        return make_builtin(b, &box);
      }
      return make_builtin(b);
    }
    Box base = parse_box(field(j, "base", at), at + "/base");
    const auto& fib = field(j, "fiber", at);
    require_object(fib, at + "/fiber");
    const std::size_t n = count(field(fib, "dim", at + "/fiber"), at + "/fiber/dim");
    if (n == 0 || n > 16) throw ConfigError(at + "/fiber/dim", "dimension must lie in [1, 16]");
    const std::size_t m = base.dim();
    auto anchor_terms = parse_poly(field(j, "anchor", at), at + "/anchor", m, {m, n}, false, true);
    auto structure_terms = parse_poly(field(j, "structure", at), at + "/structure", m, {n, n, n}, true, true);
    bool claims = false;
    if (j.contains("claimsJacobi")) {
      if (!j["claimsJacobi"].is_boolean()) throw ConfigError(at + "/claimsJacobi", "expected a boolean");
      claims = j["claimsJacobi"].get<bool>();
    }
    return LocalAlgebroid(name, base, n, poly_matrix_field(base, m, n, std::move(anchor_terms)),
                          poly_bilinear_field(base, n, n, n, std::move(structure_terms)), claims);
  }

  Prolongation build_prolongation(const json& j, const std::string& at) {
    const auto& alg = reference(j, "algebroid", InstanceKind::algebroid, at);
    if (!j.contains("fiber")) return prolong_over_self(*alg.algebroid);
    Box fiber = parse_box(j["fiber"], at + "/fiber");
    return Prolongation(*alg.algebroid, Fibration(alg.algebroid->base(), fiber));
  }

  Connection build_connection(const json& j, const std::string& at) {
    const auto& p = reference(j, "prolongation", InstanceKind::prolongation, at);
    const auto& prol = *p.prolongation;
    const std::size_t e = prol.fiber_dim();
    const std::size_t n = prol.alg_dim();
    std::vector<PolyTerm> terms;
    if (j.contains("christoffel")) {
      terms = parse_poly(j["christoffel"], at + "/christoffel", prol.total().dim(), {e, n}, false, true);
    }
    return Connection(prol, poly_matrix_field(prol.total(), e, n, std::move(terms)));
  }

  static Mat<double> parse_matrix(const json& j, const std::string& at, std::size_t rows, std::size_t cols) {
    if (!j.is_array() || j.size() != rows) throw ConfigError(at, "expected " + std::to_string(rows) + " rows");
    Mat<double> m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::string r = at + "/" + std::to_string(i);
      if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(r, "expected " + std::to_string(cols) + " columns");
      for (std::size_t c = 0; c < cols; ++c) m(i, c) = number(j[i][c], r + "/" + std::to_string(c));
    }
    return m;
  }

  Tower build_tower(const json& j, const std::string& at) {
    if (j.contains("builtin")) {
      const auto b = text(j["builtin"], at + "/builtin");
      for (auto& f : tower_fixtures())
        if (f.name == b) return f.tower;
      throw ConfigError(at + "/builtin", "unknown builtin tower '" + b + "'");
    }
    const auto kind_name = text(field(j, "towerKind", at), at + "/towerKind");
    TowerKind kind;
    if (kind_name == "projective") {
      kind = TowerKind::projective;
    } else if (kind_name == "direct") {
      kind = TowerKind::direct;
    } else {
      throw ConfigError(at + "/towerKind", "expected 'projective' or 'direct'");
    }
    const auto& lv = field(j, "levels", at);
    if (!lv.is_array() || lv.size() < 2) throw ConfigError(at + "/levels", "expected at least two prolongation names");
    std::vector<Prolongation> levels;
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const std::string here = at + "/levels/" + std::to_string(i);
      const auto& ref = resolve(text(lv[i], here), here);
      if (ref.kind != InstanceKind::prolongation) throw ConfigError(here, "'" + ref.name + "' is not a prolongation");
      levels.push_back(*ref.prolongation);
    }
    const auto& bs = field(j, "bondings", at);
    if (!bs.is_array()) throw ConfigError(at + "/bondings", "expected a list of bondings");
    std::vector<BondingTriple> bonds;
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const std::string here = at + "/bondings/" + std::to_string(i);
      require_object(bs[i], here);
      const std::size_t lo = count(field(bs[i], "lo", here), here + "/lo");
      const std::size_t hi = count(field(bs[i], "hi", here), here + "/hi");
      if (!(lo < hi && hi < levels.size())) throw ConfigError(here, "need lo < hi < number of levels");
      const auto& src = levels[kind == TowerKind::projective ? hi : lo];
      const auto& tgt = levels[kind == TowerKind::projective ? lo : hi];
      auto t = parse_matrix(field(bs[i], "base", here), here + "/base", tgt.base_dim(), src.base_dim());
      auto a = parse_matrix(field(bs[i], "algebroid", here), here + "/algebroid", tgt.alg_dim(), src.alg_dim());
      auto f = parse_matrix(field(bs[i], "fiber", here), here + "/fiber", tgt.fiber_dim(), src.fiber_dim());
      Vec<double> offset;
      if (bs[i].contains("offset")) {
        const auto& o = bs[i]["offset"];
        if (!o.is_array() || o.size() != tgt.base_dim()) throw ConfigError(here + "/offset", "wrong length");
        for (std::size_t k = 0; k < o.size(); ++k) offset.push_back(number(o[k], here + "/offset/" + std::to_string(k)));
      }
      bonds.push_back(linear_bonding(lo, hi, src.fibration().base, tgt.fibration().base, t, a, f, offset));
    }
    return Tower(kind, std::move(levels), std::move(bonds));
  }
};

}  // namespace detail

inline Scenario parse_scenario(const std::string& content, std::string name = "scenario") {
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(content);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw ConfigError("byte " + std::to_string(e.byte), std::string("parse error: ") + e.what());
  }
  return detail::ScenarioParser(root).parse(std::move(name));
}

inline Scenario load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open scenario file");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto stem = path.substr(path.find_last_of('/') + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_scenario(content, stem);
}

}  // namespace lalg
