#pragma once

// The `check` command behind the command-line tool: load, apply overrides,
// run, render. Exit status 0 = every suite passed, 1 = some suite failed,
// 2 = configuration or usage error.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lalg/error.hpp"
#include "lalg/report.hpp"
#include "lalg/scenario.hpp"

namespace lalg {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

struct CheckOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  double tol_scale = 1.0;
  std::vector<std::string> suites;  // empty: the scenario's own list
  ReportFormat format = ReportFormat::json;
  bool timing = false;
};

inline std::optional<ReportFormat> parse_format(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "text") return ReportFormat::text;
  return std::nullopt;
}

/// Applies command-line overrides. Requested suites keep the scenario's
/// tolerance when it declares them and the default otherwise.
inline void apply_overrides(Scenario& s, const CheckOptions& opt) {
  if (opt.seed) s.sampling.seed = *opt.seed;
  if (opt.samples) {
    if (*opt.samples < 1) throw ConfigError("--samples", "must be at least 1");
    s.sampling.count = *opt.samples;
  }
  if (!(opt.tol_scale > 0.0)) throw ConfigError("--tol-scale", "must be positive");
  if (!opt.suites.empty()) {
    std::vector<SuiteSpec> picked;
    for (const auto& name : opt.suites) {
      auto def = default_tolerance(name);
      if (!def) throw ConfigError("--suite", "unknown suite '" + name + "'");
      if (std::any_of(picked.begin(), picked.end(), [&](const SuiteSpec& p) { return p.name == name; })) continue;
      auto it = std::find_if(s.suites.begin(), s.suites.end(), [&](const SuiteSpec& p) { return p.name == name; });
      picked.push_back(it != s.suites.end() ? *it : SuiteSpec{name, *def, {}});
    }
    s.suites = std::move(picked);
  }
  for (auto& spec : s.suites) spec.tolerance *= opt.tol_scale;
}

inline int run_check(const CheckOptions& opt, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_config(opt.scenario);
    apply_overrides(scenario, opt);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  auto report = run_scenario(scenario, opt.timing);
  out << emit_report(report, opt.format);
  return report.pass() ? kExitPass : kExitFail;
}

}  // namespace lalg
