#pragma once

// Run reports and their JSON / text renderings. Both renderings depend only
// on the report contents, so equal runs give byte-identical output.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lalg/scenario.hpp"
#include "lalg/suites.hpp"

namespace lalg {

struct Report {
  std::string scenario;
  std::uint64_t seed = 1;
  std::size_t samples = kDefaultSamples;
  std::vector<SuiteResult> suites;
  std::optional<double> wall_ms;  // only filled when timing is requested

  bool pass() const {
    for (const auto& s : suites)
      if (!s.pass()) return false;
    return true;
  }
};

/// Runs the scenario's suites in declaration order.
inline Report run_scenario(const Scenario& scenario, bool timing = false) {
  const auto start = std::chrono::steady_clock::now();
  SuiteEnv env{scenario.sampling.seed, scenario.sampling.count, scenario.sampling.margin};
  Report r;
  r.scenario = scenario.name;
  r.seed = env.seed;
  r.samples = env.samples;
  for (const auto& spec : scenario.suites) r.suites.push_back(run_suite(scenario, spec, env));
  if (timing) {
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

namespace detail {

/// Non-finite defects have no JSON number; they are written as null.
inline nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Report& report) {
  using json = nlohmann::ordered_json;
  json suites = json::array();
  for (const auto& s : report.suites) {
    json js;
    js["name"] = s.name;
    js["checks"] = s.checks;
    js["instances"] = s.instances;
    js["maxDefect"] = detail::number_or_null(s.max_defect);
    js["tolerance"] = s.tolerance;
    js["pass"] = s.pass();
    if (s.checks > 0) {
      js["worst"] = {{"point", s.worst_point},
                     {"detail", s.worst_instance + ": " + s.worst_check + " = " + detail::short_number(s.max_defect)}};
    } else {
      js["worst"] = nullptr;
    }
    json failing = json::array();
    for (const auto& f : s.failing) {
      failing.push_back({{"instance", f.instance},
                         {"check", f.check},
                         {"point", f.point},
                         {"defect", detail::number_or_null(f.defect)}});
    }
    js["failingCount"] = s.failing_count;
    js["failing"] = std::move(failing);
    js["errors"] = s.errors;
    suites.push_back(std::move(js));
  }
  json out;
  out["scenario"] = report.scenario;
  out["suites"] = std::move(suites);
  out["pass"] = report.pass();
  out["seed"] = report.seed;
  out["samples"] = report.samples;
  if (report.wall_ms) out["wallMs"] = *report.wall_ms;
  return out;
}

inline std::string to_text(const Report& report) {
  std::ostringstream os;
  os << "scenario " << report.scenario << "  seed " << report.seed << "  samples " << report.samples << "\n";
  std::size_t failed = 0;
  for (const auto& s : report.suites) {
    if (!s.pass()) ++failed;
    os << (s.pass() ? "PASS  " : "FAIL  ") << s.name << "  checks " << s.checks << "  max "
       << detail::short_number(s.max_defect) << "  tol " << detail::short_number(s.tolerance) << "\n";
    if (s.checks > 0 && !s.pass()) {
      os << "      worst " << s.worst_instance << ": " << s.worst_check << " at " << format_point(s.worst_point) << "\n";
    }
    for (const auto& f : s.failing) {
      os << "      failing " << f.instance << ": " << f.check << " = " << detail::short_number(f.defect) << " at "
         << format_point(f.point) << "\n";
    }
    if (s.failing_count > s.failing.size()) {
      os << "      ... " << (s.failing_count - s.failing.size()) << " more failing samples\n";
    }
    for (const auto& e : s.errors) os << "      error " << e << "\n";
  }
  if (report.wall_ms) os << "wall " << detail::short_number(*report.wall_ms) << " ms\n";
  os << (report.pass() ? "PASS" : "FAIL") << "  " << (report.suites.size() - failed) << "/" << report.suites.size()
     << " suites passed\n";
  return os.str();
}

enum class ReportFormat { json, text };

inline std::string emit_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::json) return to_json(report).dump(2) + "\n";
  return to_text(report);
}

}  // namespace lalg
