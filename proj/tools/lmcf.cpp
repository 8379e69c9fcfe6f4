// Command-line front end: run a scenario, list the built-ins, or re-check a trace.
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "lmcf/errors.hpp"
#include "lmcf/scenario.hpp"

namespace {

lmcf::ScenarioConfig load(const std::string& spec) {
  if (std::filesystem::exists(spec)) return lmcf::parse_scenario(spec);
  try {
    return lmcf::builtin_scenario(spec);
  } catch (const std::out_of_range&) {
    throw lmcf::ParseError("no scenario file or built-in named '" + spec + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian mean curvature flow scenarios"};
  app.require_subcommand(1);

  std::string scenario, out_dir;
  std::optional<int> resolution;
  std::optional<double> cfl, t_max;
  std::optional<unsigned> seed;
  auto* run = app.add_subcommand("run", "Run a scenario file or built-in and write its artifacts");
  run->add_option("scenario", scenario, "Scenario file, or the name of a built-in")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--resolution", resolution, "Override the grid resolution");
  run->add_option("--cfl", cfl, "Override the CFL factor");
  run->add_option("--t-max", t_max, "Override the final time");
  run->add_option("--seed", seed, "Override the random seed");

  auto* list = app.add_subcommand("list", "List the built-in scenarios");

  std::string trace_path;
  auto* check = app.add_subcommand("check", "Re-run the trace monitors on a stored trace.csv");
  check->add_option("trace", trace_path, "trace.csv written by run")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lmcf::kExitConfig;
  }

  if (*list) {
    for (const auto& s : lmcf::list_scenarios()) std::cout << s.name << "\t" << s.description << "\n";
    return 0;
  }

  if (*check) {
    try {
      bool pass = false;
      std::cout << lmcf::check_trace(trace_path, pass) << "\n";
      return pass ? lmcf::kExitPass : lmcf::kExitExpectation;
    } catch (const lmcf::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return lmcf::kExitConfig;
    }
  }

  lmcf::ScenarioConfig config;
  try {
    config = load(scenario);
    if (resolution) config.resolution = *resolution;
    if (cfl) config.flow.cfl = *cfl;
    if (t_max) config.flow.t_max = *t_max;
    if (seed) config.seed = *seed;
    config.validate();
  } catch (const lmcf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lmcf::kExitConfig;
  }

  try {
    const lmcf::ScenarioOutcome outcome = lmcf::run_scenario(config, out_dir);
    for (const auto& e : outcome.expectations)
      std::cout << (e.pass ? "PASS " : "FAIL ") << e.name << "  observed " << e.observed << "  target " << e.target
                << (e.detail.empty() ? "" : "  (" + e.detail + ")") << "\n";
    std::cout << config.name << ": " << (outcome.exit_code == lmcf::kExitPass ? "pass" : "fail") << " (exit "
              << outcome.exit_code << "), artifacts in " << out_dir << "\n";
    return outcome.exit_code;
  } catch (const lmcf::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return lmcf::kExitFlowError;
  }
}
