// Command-line front end:
//   lalg check --scenario <path> [--seed N] [--samples N] [--tol-scale F]
//              [--suite name]... [--format json|text] [--timing]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lalg/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lie algebroid identity checker"};
  app.require_subcommand(1);
  auto* check = app.add_subcommand("check", "run a scenario's invariant suites and print a report");

  lalg::CheckOptions opt;
  std::string format = "json";
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  check->add_option("--scenario", opt.scenario, "scenario file (JSON)")->required();
  auto* seed_opt = check->add_option("--seed", seed, "override the sampling seed");
  auto* samples_opt = check->add_option("--samples", samples, "override the number of sample points");
  check->add_option("--tol-scale", opt.tol_scale, "multiply every suite tolerance");
  check->add_option("--suite", opt.suites, "run only these suites (repeatable)");
  check->add_option("--format", format, "json or text");
  check->add_flag("--timing", opt.timing, "include wall time in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lalg::kExitConfig;
  }

  auto fmt = lalg::parse_format(format);
  if (!fmt) {
    std::cerr << "usage error: unknown format '" << format << "' (expected json or text)\n";
    return lalg::kExitConfig;
  }
  opt.format = *fmt;
  if (*seed_opt) opt.seed = seed;
  if (*samples_opt) opt.samples = samples;
  return lalg::run_check(opt, std::cout, std::cerr);
}
