#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "lalg/cli.hpp"

using namespace lalg;

namespace {

std::string path(const std::string& rel) { return std::string(LALG_SOURCE_DIR) + "/" + rel; }

const SuiteResult& suite(const Report& r, const std::string& name) {
  for (const auto& s : r.suites)
    if (s.name == name) return s;
  throw std::runtime_error("no suite " + name);
}

std::string config_error(const std::string& content) {
  try {
    parse_scenario(content);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LoadConfig, TangentBasicHasOneInstanceAndFourSuites) {
  auto s = load_config(path("scenarios/tangent-basic.json"));
  EXPECT_EQ(s.name, "tangent-basic");
  ASSERT_EQ(s.instances.size(), 1u);
  EXPECT_EQ(s.instances[0].kind, InstanceKind::algebroid);
  ASSERT_EQ(s.suites.size(), 4u);
  EXPECT_EQ(s.suites[0].name, "bracket-axioms");
  EXPECT_EQ(s.suites[0].tolerance, 1e-9);
  EXPECT_EQ(s.sampling.seed, 7u);
  // Polynomial anchor decodes to the identity.
  auto rho = s.instances[0].algebroid->anchor()({0.3, -0.2});
  EXPECT_EQ(max_abs(rho - Mat<double>::identity(2)), 0.0);
}

TEST(LoadConfig, MissingReferenceNamesIt) {
  try {
    load_config(path("tests/data/missing-reference.json"));
    FAIL() << "expected a config error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.where(), "/instances/lifted/algebroid");
    EXPECT_NE(std::string(e.what()).find("'nowhere'"), std::string::npos);
  }
}

TEST(LoadConfig, NonAntisymmetricStructureIsRejectedByTheAlgebroid) {
  try {
    load_config(path("tests/data/not-antisymmetric.json"));
    FAIL() << "expected a config error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.where(), "/instances/lopsided");
    EXPECT_NE(std::string(e.what()).find("not antisymmetric"), std::string::npos);
  }
}

TEST(LoadConfig, SchemaViolationsCarryLocations) {
  EXPECT_NE(config_error("{\"instances\": {}}").find("/instances"), std::string::npos);
  EXPECT_NE(config_error("[1, 2]").find("/:"), std::string::npos);
  EXPECT_NE(config_error("{\"instances\": {\"a\": {\"kind\": \"blob\"}}}").find("/instances/a/kind"), std::string::npos);
  EXPECT_NE(config_error(R"({"instances": {"a": {"kind": "algebroid", "builtin": "tangent:2"}}, "suites": ["nope"]})")
                .find("/suites/0"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"instances": {"a": {"kind": "algebroid", "builtin": "tangent:2"}},
                             "suites": [{"name": "jacobi", "tolerance": 0}]})")
                .find("/suites/0/tolerance"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"instances": {"a": {"kind": "algebroid", "builtin": "tangent:2"}},
                             "sampling": {"count": 0}})")
                .find("/sampling/count"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"instances": {"a": {"kind": "algebroid", "base": {"dim": 2}, "fiber": {"dim": 1},
                             "anchor": [{"coeff": 1, "powers": [0], "outPair": [0, 0]}], "structure": []}}})")
                .find("/instances/a/anchor/0/powers"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"instances": {"a": {"kind": "algebroid", "base": {"dim": 2}, "fiber": {"dim": 1},
                             "anchor": [{"coeff": 1, "powers": [0, 0], "outPair": [2, 0]}], "structure": []}}})")
                .find("/instances/a/anchor/0"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"instances": {"p": {"kind": "prolongation", "algebroid": "q"},
                                           "q": {"kind": "prolongation", "algebroid": "p"}}})")
                .find("circular"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"instances": {"a": {"kind": "algebroid", "builtin": "tangent:2"},
                                           "c": {"kind": "connection", "prolongation": "a"}}})")
                .find("expected a prolongation"),
            std::string::npos);
  EXPECT_NE(config_error("{\"instances\": ").find("parse error"), std::string::npos);
}

TEST(LoadConfig, ForwardReferencesAndDeclarationOrder) {
  auto s = parse_scenario(R"({"instances": {
      "lifted": {"kind": "prolongation", "algebroid": "base"},
      "base": {"kind": "algebroid", "builtin": "tangent:2"}}})");
  ASSERT_EQ(s.instances.size(), 2u);
  EXPECT_EQ(s.instances[0].name, "lifted");
  EXPECT_EQ(s.instances[1].name, "base");
  EXPECT_EQ(s.suites.size(), suite_catalog().size());
}

TEST(RunSuite, TangentBasicPasses) {
  auto report = run_scenario(load_config(path("scenarios/tangent-basic.json")));
  EXPECT_TRUE(report.pass());
  for (const auto& s : report.suites) {
    EXPECT_GT(s.checks, 0u) << s.name;
    EXPECT_LE(s.max_defect, s.tolerance) << s.name;
  }
}

TEST(RunSuite, NonJacobiFailsOnlyTheJacobiSuite) {
  auto report = run_scenario(load_config(path("scenarios/non-jacobi.json")));
  EXPECT_FALSE(report.pass());
  for (const auto& s : report.suites) EXPECT_EQ(s.pass(), s.name != "jacobi") << s.name;
  const auto& j = suite(report, "jacobi");
  EXPECT_FALSE(j.failing.empty());
  EXPECT_EQ(j.failing.front().point.size(), 2u);
  // The frame jacobiator is exactly e1, so the worst defect is at least 1.
  EXPECT_GE(j.max_defect, 1.0 - 1e-10);
}

TEST(RunSuite, SameSeedGivesIdenticalReports) {
  auto s = load_config(path("scenarios/full.json"));
  s.sampling.count = 8;
  auto a = emit_report(run_scenario(s), ReportFormat::json);
  auto b = emit_report(run_scenario(s), ReportFormat::json);
  EXPECT_EQ(a, b);
  s.sampling.seed += 1;
  EXPECT_NE(emit_report(run_scenario(s), ReportFormat::json), a);
}

TEST(RunSuite, InstanceErrorsAreIsolated) {
  Box box = Box::cube(2);
  MatrixField fragile(box, [](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::value_type;
    if (primal(x[0]) > 0.5) throw DomainError("fragile anchor");
    return Mat<S>(2, 2);
  });
  Scenario s;
  Instance bad;
  bad.name = "fragile";
  bad.algebroid = LocalAlgebroid("fragile", box, 2, fragile, constant<Bilinear>(box, Bilinear<double>(2, 2, 2)), false);
  Instance good;
  good.name = "plane";
  good.algebroid = make_tangent(box);
  s.instances = {bad, good};
  s.suites = {{"bracket-axioms", 1e-9, {}}, {"morphism", 1e-14, {}}};
  s.sampling.count = 8;
  auto report = run_scenario(s);
  ASSERT_EQ(report.suites.size(), 2u);
  for (const auto& r : report.suites) {
    EXPECT_EQ(r.instances, 2u);
    ASSERT_EQ(r.errors.size(), 1u) << r.name;
    EXPECT_NE(r.errors[0].find("fragile anchor"), std::string::npos);
    EXPECT_GT(r.checks, 0u);
    EXPECT_FALSE(r.pass());
  }
}

TEST(EmitReport, JsonShapeAndTimingIsOptIn) {
  auto report = run_scenario(load_config(path("scenarios/tangent-basic.json")));
  auto j = to_json(report);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["seed"].get<int>(), 7);
  EXPECT_EQ(j["samples"].get<int>(), 64);
  EXPECT_FALSE(j.contains("wallMs"));
  ASSERT_EQ(j["suites"].size(), 4u);
  for (const auto& s : j["suites"]) {
    for (const char* key : {"name", "checks", "maxDefect", "tolerance", "pass", "worst"}) EXPECT_TRUE(s.contains(key)) << key;
    EXPECT_TRUE(s["worst"].contains("point"));
    EXPECT_TRUE(s["worst"].contains("detail"));
  }
  auto timed = run_scenario(load_config(path("scenarios/tangent-basic.json")), true);
  EXPECT_TRUE(to_json(timed).contains("wallMs"));
}

TEST(EmitReport, TextListsFailingSamples) {
  auto report = run_scenario(load_config(path("scenarios/non-jacobi.json")));
  auto text = emit_report(report, ReportFormat::text);
  EXPECT_NE(text.find("FAIL  jacobi"), std::string::npos);
  EXPECT_NE(text.find("failing skew: jacobiator"), std::string::npos);
  EXPECT_NE(text.find("PASS  bracket-axioms"), std::string::npos);
}

TEST(RunCheck, ExitCodesAndOverrides) {
  std::ostringstream out, err;
  CheckOptions opt;
  opt.scenario = path("scenarios/tangent-basic.json");
  EXPECT_EQ(run_check(opt, out, err), kExitPass);

  opt.scenario = path("scenarios/non-jacobi.json");
  EXPECT_EQ(run_check(opt, out, err), kExitFail);
  // Dropping the failing suite or loosening everything past the defect turns the run green.
  opt.suites = {"forms", "bracket-axioms"};
  EXPECT_EQ(run_check(opt, out, err), kExitPass);
  opt.suites = {};
  opt.tol_scale = 1e9;
  EXPECT_EQ(run_check(opt, out, err), kExitPass);

  opt.tol_scale = -1.0;
  EXPECT_EQ(run_check(opt, out, err), kExitConfig);
  opt.tol_scale = 1.0;
  opt.suites = {"nope"};
  EXPECT_EQ(run_check(opt, out, err), kExitConfig);
  opt.suites = {};
  opt.scenario = path("tests/data/malformed.json");
  EXPECT_EQ(run_check(opt, out, err), kExitConfig);
}

TEST(RunCheck, SuiteSelectionKeepsCommandLineOrderAndDeclaredTolerances) {
  auto s = load_config(path("scenarios/tangent-basic.json"));
  CheckOptions opt;
  opt.suites = {"morphism", "de-rham", "morphism"};
  opt.tol_scale = 2.0;
  opt.samples = 5;
  opt.seed = 42;
  apply_overrides(s, opt);
  ASSERT_EQ(s.suites.size(), 2u);
  EXPECT_EQ(s.suites[0].name, "morphism");
  EXPECT_EQ(s.suites[0].tolerance, 2e-14);
  EXPECT_EQ(s.suites[1].name, "de-rham");
  EXPECT_EQ(s.suites[1].tolerance, 2e-7);
  EXPECT_EQ(s.sampling.count, 5u);
  EXPECT_EQ(s.sampling.seed, 42u);
}

TEST(RunSuite, PerSuiteInstanceSelection) {
  const std::string base = R"({"instances": {
      "drop": {"kind": "algebroid", "builtin": "rank-drop"},
      "so3": {"kind": "algebroid", "builtin": "lie-algebra:so3"}},
    "sampling": {"count": 8},
    "suites": [)";
  auto all = run_scenario(parse_scenario(base + R"("jacobi"]})"));
  EXPECT_FALSE(all.pass());
  EXPECT_EQ(all.suites[0].instances, 2u);
  auto picked = run_scenario(parse_scenario(base + R"({"name": "jacobi", "instances": ["so3"]}]})"));
  EXPECT_TRUE(picked.pass());
  EXPECT_EQ(picked.suites[0].instances, 1u);
  EXPECT_NE(config_error(base + R"({"name": "jacobi", "instances": ["ghost"]}]})").find("/suites/0/instances/0"),
            std::string::npos);
}
