#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lmcf/errors.hpp"
#include "lmcf/scenario.hpp"

using namespace lmcf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
# tiny graph-curve run
name = small
description = small graph curve
ambient.kind = flat_torus
initial.family = graph_curve
initial.amplitude = 0.01
initial.mode = 1
resolution = 32
flow.t_max = 0.05
flow.monitor_stride = 10
flow.snapshot_stride = 5
flow.eigen_stride = 5
flow.residual_stride = 5
class.kind = B
class.kappa = 1
class.r = 0.2
class.lambda = 1
class.eps = 1
class.delta = 19.7
checks.vector_field_trials = 3
)";

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lmcf_test_scenario_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("built-in list") {
  std::set<std::string> names;
  for (const auto& s : list_scenarios()) {
    names.insert(s.name);
    CHECK_FALSE(s.description.empty());
  }
  for (const char* expected : {"s1_flat_torus", "s2_great_circle", "s2_great_circle_m1", "s2_great_circle_m3",
                               "s3_clifford_cp2", "s4_hyperbolic_cylinder", "s5_shrinking_circle"})
    CHECK(names.count(expected) == 1);
  CHECK_THROWS_AS(builtin_scenario("s9_nothing"), std::out_of_range);
}

TEST_CASE("built-in S1 parses to the documented setup") {
  const ScenarioConfig c = builtin_scenario("s1_flat_torus");
  CHECK(c.ambient == "flat_torus");
  CHECK(c.family == "graph_curve");
  CHECK(c.amplitude == 0.01);
  CHECK(c.mode == 1);
  CHECK(c.resolution == 128);
  CHECK(c.class_kind == "B");
  REQUIRE(c.expect_slope);
  CHECK(*c.expect_slope == doctest::Approx(-78.9568).epsilon(1e-5));
  CHECK(c.expect_converged);
}

TEST_CASE("shipped scenario files match the built-ins") {
  for (const auto& s : list_scenarios()) {
    const fs::path file = fs::path(LMCF_SCENARIO_DIR) / (s.name + ".scn");
    REQUIRE(fs::exists(file));
    const ScenarioConfig from_file = parse_scenario(file);
    CHECK(from_file.name == s.name);
    CHECK(read_file(file) == s.text);
  }
}

TEST_CASE("parse errors name the key and line") {
  try {
    parse_scenario_text("name = x\nfoo = 1\n", "inline");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("foo") != std::string::npos);
    CHECK(what.find("inline:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario_text("name = x\nname = y\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario_text("resolution = many\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario_text("resolution =\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario_text("just words\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario(fs::path("/nonexistent/file.scn")), ParseError);
}

TEST_CASE("validation collects every violation") {
  std::string text = kSmall;
  text += "resolution = 8\n";
  text.replace(text.find("resolution = 32\n"), 16, "");
  text += "flow.cfl = 2\n";
  try {
    parse_scenario_text(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("resolution") != std::string::npos);
    CHECK(what.find("cfl") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario_text("ambient.kind = klein_bottle\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_text("ambient.kind = round_sphere\ninitial.family = graph_curve\n"), ValidationError);
}

TEST_CASE("build_initial follows the family") {
  const ScenarioConfig c = parse_scenario_text(kSmall);
  const Immersion imm = build_initial(c);
  CHECK(imm.node_count() == 32);
  CHECK(imm.space().kind() == AmbientKind::FlatTorus);
}

TEST_CASE("run writes every artifact and check re-verifies it") {
  const fs::path dir = scratch_dir("artifacts");
  const ScenarioConfig c = parse_scenario_text(kSmall);
  const ScenarioOutcome out = run_scenario(c, dir);
  CHECK(out.exit_code == kExitPass);

  for (const char* f : {"trace.csv", "trace_aux.csv", "summary.json", "checks.json"}) CHECK(fs::exists(dir / f));
  CHECK(fs::exists(dir / "snapshots" / "snapshot_0000.csv"));
  const std::string header = read_file(dir / "trace.csv").substr(0, read_file(dir / "trace.csv").find('\n'));
  CHECK(header == "t,vol,l2h,max_h,max_a,max_grad_a,lambda1,defect,e_accum,theta_resid,h_resid");

  const json summary = json::parse(read_file(dir / "summary.json"));
  for (const char* key : {"scenario", "ambient", "family", "resolution", "seed", "dim", "scalar_curvature", "status",
                          "steps", "t_final", "final_max_h", "expectations", "checks", "verdict", "exit_code"})
    CHECK_MESSAGE(summary.contains(key), key);
  CHECK(summary["verdict"] == "pass");
  CHECK(summary["scenario"] == "small");
  CHECK(summary["dim"] == 1);

  const json checks = json::parse(read_file(dir / "checks.json"));
  REQUIRE(checks.is_array());
  std::set<std::string> names;
  for (const auto& ch : checks) {
    names.insert(ch["name"].get<std::string>());
    CHECK(ch.contains("pass"));
    CHECK(ch.contains("margin"));
    CHECK(ch.contains("witnesses"));
  }
  for (const char* n : {"gronwall", "gronwall_exact", "volume_monotonicity", "c0_from_l2", "vector_field_inequality",
                        "class_B_membership"})
    CHECK_MESSAGE(names.count(n) == 1, n);

  bool all_pass = false;
  const std::string again = check_trace(dir / "trace.csv", all_pass);
  CHECK(all_pass);
  CHECK(json::parse(again).is_array());

  fs::remove(dir / "summary.json");
  CHECK_THROWS_AS(check_trace(dir / "trace.csv", all_pass), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("unmet expectations give exit code 1") {
  std::string text = kSmall;
  text += "expect.slope = 50\n";
  const ScenarioOutcome out = run_scenario(parse_scenario_text(text), {});
  CHECK(out.exit_code == kExitExpectation);
  bool found = false;
  for (const auto& e : out.expectations)
    if (e.name == "decay_slope") {
      found = true;
      CHECK_FALSE(e.pass);
    }
  CHECK(found);
}

TEST_CASE("unexpected flow failure gives exit code 2") {
  const char* text = R"(
name = bad_circle
ambient.kind = flat_torus
initial.family = flat_circle
initial.radius = 0.2
resolution = 32
flow.t_max = 0.05
flow.monitor_stride = 50
flow.collapse_ratio = 0.1
class.kind = none
checks.vector_field_trials = 1
)";
  const ScenarioOutcome out = run_scenario(parse_scenario_text(text), {});
  CHECK(out.exit_code == kExitFlowError);
  CHECK(out.trace.status == FlowStatus::Failed);
}
