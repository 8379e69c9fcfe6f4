#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lmcf/deformations.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/monitors.hpp"

namespace lmcf {

/// Everything needed to reproduce one run. Scenario files are `key = value`
/// lines with dotted keys; `#` starts a comment. See scenarios/*.scn.
struct ScenarioConfig {
  std::string name;
  std::string description;

  // ambient.*
  std::string ambient = "flat_torus";  // flat_torus | round_sphere | fubini_study_cp2 | hyperbolic_cylinder
  int complex_dim = 1;                 // flat_torus only
  std::vector<double> periods;         // flat_torus lattice, one per real coordinate
  double sphere_radius = 1.0;
  double holomorphic_curvature = 4.0;
  double core_length = 2.0 * 3.14159265358979323846;

  // initial.*
  std::string family = "graph_curve";  // graph_curve | flat_circle | perturbed_great_circle | clifford_deformed | cylinder_curve
  double amplitude = 0.01;
  int mode = 1;
  double radius = 0.2;
  std::string potential = "cos";        // clifford_deformed potential name
  int potential_k0 = 2;
  int potential_k1 = 0;
  double deform_s = 0.02;
  double exactness_probe_time = 0.0;    // > 0 enables the flux correction
  int exactness_newton_steps = 1;

  int resolution = 128;
  unsigned seed = 1u;
  FlowConfig flow;

  // class.*
  std::string class_kind = "A";  // A | B | none
  ClassParams class_params;
  int noncollapse_samples = 16;
  int vector_field_trials = 20;

  // fit.*
  FitWindow fit;

  // expect.*
  std::optional<double> expect_slope;           // target slope of log ∫|H|²
  double expect_slope_tol = 0.1;                // relative
  bool expect_slope_from_spectrum = false;      // target −2(λ_mode − R̄/2n) at t = 0
  std::optional<double> expect_slope_abs_max;   // neutral direction: |slope| below this
  bool expect_converged = false;                // sustained max|H| < flow.conv_tol
  std::optional<double> expect_final_max_h;
  std::optional<bool> expect_essential;
  std::string expect_failure = "none";          // none | singularity
  double expect_failure_t_min = 0.0;
  double expect_failure_t_max = 0.0;

  /// Throws ValidationError listing every violation.
  void validate() const;
};

/// Parses scenario text. Unknown keys and malformed values raise ParseError
/// naming the key and line; semantic problems raise ValidationError.
ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin = "<text>");
ScenarioConfig parse_scenario(const std::filesystem::path& path);

struct BuiltinScenario {
  std::string name;
  std::string description;
  std::string text;
};

/// The shipped scenarios S1–S5.
const std::vector<BuiltinScenario>& list_scenarios();
/// Parses the built-in of that name; throws std::out_of_range if unknown.
ScenarioConfig builtin_scenario(const std::string& name);

/// Builds the initial immersion. Throws on invalid geometry.
Immersion build_initial(const ScenarioConfig& config);

enum ExitCode : int { kExitPass = 0, kExitExpectation = 1, kExitFlowError = 2, kExitConfig = 3 };

struct Expectation {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ScenarioOutcome {
  int exit_code = kExitPass;
  FlowTrace trace;
  std::vector<CheckResult> checks;        // one aggregated entry per monitor
  std::vector<Expectation> expectations;
  std::optional<DecayFit> fit;
  std::string summary_json;
  std::string checks_json;
};

/// Runs the flow and every applicable monitor. With a non-empty `out_dir`
/// writes trace.csv, trace_aux.csv, checks.json, summary.json and snapshots/.
ScenarioOutcome run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Re-runs the trace-level monitors on a stored trace.csv (plus the sibling
/// trace_aux.csv and summary.json when present). Returns checks.json text and
/// sets `all_pass`. Throws ParseError on malformed input.
std::string check_trace(const std::filesystem::path& trace_csv, bool& all_pass);

/// JSON object for one monitor result.
std::string check_json(const CheckResult& check);

}  // namespace lmcf
