#include "lmcf/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "lmcf/errors.hpp"
#include "lmcf/families.hpp"

namespace lmcf {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v) {
  std::size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument(v);
  return d;
}

long parse_long(const std::string& v) {
  std::size_t used = 0;
  const long d = std::stol(v, &used);
  if (used != v.size()) throw std::invalid_argument(v);
  return d;
}

bool parse_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument(v);
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(parse_double(trim(cell)));
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [&t](const std::string& key, double ScenarioConfig::*field) {
      t[key] = [field](ScenarioConfig& c, const std::string& v) { c.*field = parse_double(v); };
    };
    auto integer = [&t](const std::string& key, int ScenarioConfig::*field) {
      t[key] = [field](ScenarioConfig& c, const std::string& v) { c.*field = static_cast<int>(parse_long(v)); };
    };
    auto str = [&t](const std::string& key, std::string ScenarioConfig::*field) {
      t[key] = [field](ScenarioConfig& c, const std::string& v) { c.*field = v; };
    };
    auto flow_dbl = [&t](const std::string& key, double FlowConfig::*field) {
      t[key] = [field](ScenarioConfig& c, const std::string& v) { c.flow.*field = parse_double(v); };
    };
    auto flow_int = [&t](const std::string& key, int FlowConfig::*field) {
      t[key] = [field](ScenarioConfig& c, const std::string& v) { c.flow.*field = static_cast<int>(parse_long(v)); };
    };
    auto class_dbl = [&t](const std::string& key, double ClassParams::*field) {
      t[key] = [field](ScenarioConfig& c, const std::string& v) { c.class_params.*field = parse_double(v); };
    };
    auto fit_dbl = [&t](const std::string& key, double FitWindow::*field) {
      t[key] = [field](ScenarioConfig& c, const std::string& v) { c.fit.*field = parse_double(v); };
    };

    str("name", &ScenarioConfig::name);
    str("description", &ScenarioConfig::description);
    str("ambient.kind", &ScenarioConfig::ambient);
    integer("ambient.complex_dim", &ScenarioConfig::complex_dim);
    t["ambient.periods"] = [](ScenarioConfig& c, const std::string& v) { c.periods = parse_list(v); };
    dbl("ambient.radius", &ScenarioConfig::sphere_radius);
    dbl("ambient.holomorphic_curvature", &ScenarioConfig::holomorphic_curvature);
    dbl("ambient.core_length", &ScenarioConfig::core_length);

    str("initial.family", &ScenarioConfig::family);
    dbl("initial.amplitude", &ScenarioConfig::amplitude);
    integer("initial.mode", &ScenarioConfig::mode);
    dbl("initial.radius", &ScenarioConfig::radius);
    str("initial.potential", &ScenarioConfig::potential);
    integer("initial.potential_k0", &ScenarioConfig::potential_k0);
    integer("initial.potential_k1", &ScenarioConfig::potential_k1);
    dbl("initial.deform_s", &ScenarioConfig::deform_s);
    dbl("initial.exactness_probe_time", &ScenarioConfig::exactness_probe_time);
    integer("initial.exactness_newton_steps", &ScenarioConfig::exactness_newton_steps);

    integer("resolution", &ScenarioConfig::resolution);
    t["seed"] = [](ScenarioConfig& c, const std::string& v) {
      const long s = parse_long(v);
      if (s < 0) throw std::invalid_argument(v);
      c.seed = static_cast<unsigned>(s);
    };

    flow_dbl("flow.cfl", &FlowConfig::cfl);
    flow_dbl("flow.t_max", &FlowConfig::t_max);
    t["flow.max_steps"] = [](ScenarioConfig& c, const std::string& v) { c.flow.max_steps = parse_long(v); };
    flow_int("flow.monitor_stride", &FlowConfig::monitor_stride);
    flow_dbl("flow.defect_tol", &FlowConfig::defect_tol);
    flow_int("flow.snapshot_stride", &FlowConfig::snapshot_stride);
    flow_dbl("flow.conv_tol", &FlowConfig::conv_tol);
    flow_int("flow.conv_sustain", &FlowConfig::conv_sustain);
    t["flow.stop_on_convergence"] = [](ScenarioConfig& c, const std::string& v) {
      c.flow.stop_on_convergence = parse_bool(v);
    };
    flow_int("flow.eigen_stride", &FlowConfig::eigen_stride);
    flow_int("flow.eigen_count", &FlowConfig::eigen_count);
    flow_int("flow.residual_stride", &FlowConfig::residual_stride);
    flow_dbl("flow.collapse_ratio", &FlowConfig::collapse_ratio);
    t["flow.tol_closed"] = [](ScenarioConfig& c, const std::string& v) { c.flow.angle.tol_closed = parse_double(v); };
    t["flow.tol_holonomy"] = [](ScenarioConfig& c, const std::string& v) {
      c.flow.angle.tol_holonomy = parse_double(v);
    };

    str("class.kind", &ScenarioConfig::class_kind);
    class_dbl("class.kappa", &ClassParams::kappa);
    class_dbl("class.r", &ClassParams::r);
    class_dbl("class.lambda", &ClassParams::lambda_a);
    class_dbl("class.eps", &ClassParams::eps);
    class_dbl("class.delta", &ClassParams::delta);
    integer("class.noncollapse_samples", &ScenarioConfig::noncollapse_samples);
    integer("checks.vector_field_trials", &ScenarioConfig::vector_field_trials);

    fit_dbl("fit.l2h_min", &FitWindow::l2h_min);
    fit_dbl("fit.l2h_max", &FitWindow::l2h_max);
    fit_dbl("fit.t_min", &FitWindow::t_min);
    fit_dbl("fit.t_max", &FitWindow::t_max);

    t["expect.slope"] = [](ScenarioConfig& c, const std::string& v) { c.expect_slope = parse_double(v); };
    dbl("expect.slope_tol", &ScenarioConfig::expect_slope_tol);
    t["expect.slope_from_spectrum"] = [](ScenarioConfig& c, const std::string& v) {
      c.expect_slope_from_spectrum = parse_bool(v);
    };
    t["expect.slope_abs_max"] = [](ScenarioConfig& c, const std::string& v) { c.expect_slope_abs_max = parse_double(v); };
    t["expect.converged"] = [](ScenarioConfig& c, const std::string& v) { c.expect_converged = parse_bool(v); };
    t["expect.final_max_h"] = [](ScenarioConfig& c, const std::string& v) { c.expect_final_max_h = parse_double(v); };
    t["expect.essential"] = [](ScenarioConfig& c, const std::string& v) { c.expect_essential = parse_bool(v); };
    str("expect.failure", &ScenarioConfig::expect_failure);
    dbl("expect.failure_t_min", &ScenarioConfig::expect_failure_t_min);
    dbl("expect.failure_t_max", &ScenarioConfig::expect_failure_t_max);
    return t;
  }();
  return table;
}

SpacePtr build_space(const ScenarioConfig& c) {
  if (c.ambient == "flat_torus")
    return std::make_shared<const AmbientSpace>(AmbientSpace::flat_torus(c.complex_dim, c.periods));
  if (c.ambient == "round_sphere") return std::make_shared<const AmbientSpace>(AmbientSpace::round_sphere(c.sphere_radius));
  if (c.ambient == "fubini_study_cp2")
    return std::make_shared<const AmbientSpace>(AmbientSpace::fubini_study_cp2(c.holomorphic_curvature));
  if (c.ambient == "hyperbolic_cylinder")
    return std::make_shared<const AmbientSpace>(AmbientSpace::hyperbolic_cylinder(c.core_length));
  throw ValidationError("unknown ambient.kind '" + c.ambient + "'");
}

// Ambient kind and real dimension each family needs.
struct FamilyInfo {
  std::string ambient;
  int complex_dim;
};

const std::map<std::string, FamilyInfo>& families() {
  static const std::map<std::string, FamilyInfo> table{
      {"graph_curve", {"flat_torus", 1}},
      {"flat_circle", {"flat_torus", 1}},
      {"perturbed_great_circle", {"round_sphere", 1}},
      {"clifford_deformed", {"fubini_study_cp2", 2}},
      {"cylinder_curve", {"hyperbolic_cylinder", 1}},
  };
  return table;
}

Immersion build_unperturbed(const ScenarioConfig& c, const SpacePtr& space) {
  const int n = c.resolution;
  if (c.family == "graph_curve") return straight_line(space, n);
  if (c.family == "perturbed_great_circle") return tilted_great_circle(space, n, 0.0);
  if (c.family == "cylinder_curve") return cylinder_curve(space, n, 0.0, 1);
  if (c.family == "clifford_deformed") return clifford_torus(space, n, discrete_clifford_modulus(space, n));
  throw std::invalid_argument("family '" + c.family + "' has no generating potential");
}

// Potential whose hamiltonian deformation of the unperturbed base produces the
// family to first order.
std::optional<std::pair<Immersion, Eigen::VectorXd>> generating_potential(const ScenarioConfig& c, const SpacePtr& space) {
  if (c.family == "flat_circle") return std::nullopt;
  Immersion base = build_unperturbed(c, space);
  Eigen::VectorXd f;
  if (c.family == "graph_curve")
    f = named_potential(base.topology(), "cos", 1.0, c.mode);
  else if (c.family == "clifford_deformed")
    f = named_potential(base.topology(), c.potential, 1.0, c.potential_k0, c.potential_k1);
  else
    f = named_potential(base.topology(), "sin", 1.0, c.mode);
  return std::make_pair(std::move(base), std::move(f));
}

struct InitialState {
  Immersion immersion;
  std::optional<ExactnessCorrection> correction;
};

InitialState build_initial_state(const ScenarioConfig& c) {
  const SpacePtr space = build_space(c);
  const int n = c.resolution;
  if (c.family == "graph_curve") return {graph_curve(space, n, c.amplitude, c.mode), std::nullopt};
  if (c.family == "flat_circle") {
    const double cx = c.periods.size() >= 2 ? 0.5 * c.periods[0] : 0.5;
    const double cy = c.periods.size() >= 2 ? 0.5 * c.periods[1] : 0.5;
    return {flat_circle(space, n, c.radius, cx, cy), std::nullopt};
  }
  if (c.family == "perturbed_great_circle") return {perturbed_great_circle(space, n, c.amplitude, c.mode), std::nullopt};
  if (c.family == "cylinder_curve") return {cylinder_curve(space, n, c.amplitude, c.mode), std::nullopt};
  if (c.family == "clifford_deformed") {
    const Immersion base = clifford_torus(space, n, discrete_clifford_modulus(space, n));
    const Eigen::VectorXd f = named_potential(base.topology(), c.potential, 1.0, c.potential_k0, c.potential_k1);
    Immersion init = deform(base, f, c.deform_s);
    if (c.exactness_probe_time <= 0.0) return {std::move(init), std::nullopt};
    FlowConfig probe = c.flow;
    probe.t_max = c.exactness_probe_time;
    probe.monitor_stride = 1'000'000;
    probe.eigen_stride = 0;
    probe.residual_stride = 0;
    probe.snapshot_stride = 0;
    probe.stop_on_convergence = false;
    const ExactnessCorrection corr = exactness_correction(init, probe, c.exactness_newton_steps);
    return {flux_shift(init, corr.flux), corr};
  }
  throw ValidationError("unknown initial.family '" + c.family + "'");
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json check_object(const CheckResult& c) {
  json w = json::object();
  for (const auto& [k, v] : c.witnesses) w[k] = v;
  json o{{"name", c.name}, {"pass", c.pass}, {"required", c.required}, {"margin", c.margin}, {"witnesses", w}};
  if (!c.note.empty()) o["note"] = c.note;
  return o;
}

json fit_json(const DecayFit& f) {
  return json{{"slope", f.slope},         {"intercept", f.intercept}, {"std_error", f.std_error},
              {"ci95", {f.ci_low, f.ci_high}}, {"gamma", f.gamma},       {"samples", f.samples},
              {"t_begin", f.t_begin},     {"t_end", f.t_end}};
}

// Worst-margin entry across several evaluations of one monitor.
struct Aggregate {
  std::optional<CheckResult> worst;
  int evaluated = 0;
  int skipped = 0;
  int failures = 0;

  void add(CheckResult r, double t) {
    ++evaluated;
    if (!r.pass) ++failures;
    r.witness("t", t);
    if (!worst || r.margin < worst->margin) worst = std::move(r);
  }
  CheckResult finish(const std::string& name, const std::string& skip_reason) const {
    CheckResult out;
    if (worst) {
      out = *worst;
      out.pass = failures == 0;
    } else {
      out.name = name;
      out.note = "not applicable: " + skip_reason;
    }
    out.witness("states_evaluated", evaluated);
    out.witness("states_skipped", skipped);
    return out;
  }
};

std::vector<CheckResult> trace_checks(const FlowTrace& trace, bool exact) {
  std::vector<CheckResult> out;
  out.push_back(gronwall_check(trace, false));
  if (exact) out.push_back(gronwall_check(trace, true));
  out.push_back(eigen_bound_check(trace));
  out.push_back(volume_monotonicity_check(trace.rows));
  out.push_back(energy_monotonicity_check(trace.rows));
  out.push_back(volume_form_check(trace));
  out.push_back(short_time_doubling_check(trace.rows));
  out.push_back(defect_drift_check(trace.rows));
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void ScenarioConfig::validate() const {
  std::vector<std::string> bad;
  if (name.empty()) bad.emplace_back("name must be set");
  if (resolution < GridTopology::kMinResolution)
    bad.emplace_back("resolution must be >= " + std::to_string(GridTopology::kMinResolution));
  const auto fam = families().find(family);
  if (fam == families().end()) {
    bad.emplace_back("unknown initial.family '" + family + "'");
  } else {
    if (fam->second.ambient != ambient)
      bad.emplace_back("initial.family " + family + " requires ambient.kind = " + fam->second.ambient);
    if (ambient == "flat_torus" && complex_dim != fam->second.complex_dim)
      bad.emplace_back("initial.family " + family + " requires ambient.complex_dim = " +
                       std::to_string(fam->second.complex_dim));
  }
  if (ambient == "flat_torus" && !periods.empty() && static_cast<int>(periods.size()) != 2 * complex_dim)
    bad.emplace_back("ambient.periods needs one entry per real coordinate");
  for (double p : periods)
    if (!(p > 0.0)) bad.emplace_back("ambient.periods must be positive");
  if (!(sphere_radius > 0.0)) bad.emplace_back("ambient.radius must be positive");
  if (!(holomorphic_curvature > 0.0)) bad.emplace_back("ambient.holomorphic_curvature must be positive");
  if (!(core_length > 0.0)) bad.emplace_back("ambient.core_length must be positive");
  if (mode < 1) bad.emplace_back("initial.mode must be >= 1");
  if (!(radius > 0.0)) bad.emplace_back("initial.radius must be positive");
  if (potential != "cos" && potential != "sin" && potential != "zero")
    bad.emplace_back("initial.potential must be cos, sin or zero");
  if (exactness_probe_time < 0.0) bad.emplace_back("initial.exactness_probe_time must be non-negative");
  if (exactness_newton_steps < 1) bad.emplace_back("initial.exactness_newton_steps must be >= 1");
  try {
    flow.validate();
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    std::stringstream ss(msg);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) bad.push_back("flow: " + trim(line.substr(line.find('-') + 1)));
  }
  if (class_kind != "A" && class_kind != "B" && class_kind != "none") bad.emplace_back("class.kind must be A, B or none");
  if (class_kind != "none") {
    try {
      class_params.validate(class_kind == "B");
    } catch (const ValidationError& e) {
      std::string msg = e.what();
      std::stringstream ss(msg);
      std::string line;
      std::getline(ss, line);
      while (std::getline(ss, line)) bad.push_back("class: " + trim(line));
    }
  }
  if (noncollapse_samples < 1) bad.emplace_back("class.noncollapse_samples must be >= 1");
  if (vector_field_trials < 0) bad.emplace_back("checks.vector_field_trials must be >= 0");
  if (!(fit.l2h_min > 0.0 && fit.l2h_min < fit.l2h_max)) bad.emplace_back("fit window needs 0 < l2h_min < l2h_max");
  if (!(fit.t_min < fit.t_max)) bad.emplace_back("fit window needs t_min < t_max");
  if (!(expect_slope_tol > 0.0)) bad.emplace_back("expect.slope_tol must be positive");
  if (expect_slope && expect_slope_from_spectrum) bad.emplace_back("expect.slope and expect.slope_from_spectrum are exclusive");
  if (expect_slope_abs_max && !(*expect_slope_abs_max > 0.0)) bad.emplace_back("expect.slope_abs_max must be positive");
  if (expect_final_max_h && !(*expect_final_max_h > 0.0)) bad.emplace_back("expect.final_max_h must be positive");
  if (expect_failure != "none" && expect_failure != "singularity") bad.emplace_back("expect.failure must be none or singularity");
  if (expect_failure == "singularity" && !(expect_failure_t_min < expect_failure_t_max))
    bad.emplace_back("expect.failure_t_min must be below expect.failure_t_max");
  if (bad.empty()) return;
  std::string msg = "invalid scenario '" + name + "':";
  for (const auto& b : bad) msg += "\n  - " + b;
  throw ValidationError(msg);
}

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
  ScenarioConfig c;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(where + ": unknown key '" + key + "'");
    if (seen.count(key))
      throw ParseError(where + ": duplicate key '" + key + "' (first at line " + std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    if (value.empty()) throw ParseError(where + ": key '" + key + "' has no value");
    try {
      it->second(c, value);
    } catch (const std::exception&) {
      throw ParseError(where + ": key '" + key + "': malformed value '" + value + "'");
    }
  }
  c.validate();
  return c;
}

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path.string());
}

const std::vector<BuiltinScenario>& list_scenarios() {
  static const std::vector<BuiltinScenario> all = [] {
    static const std::pair<const char*, const char*> raw[] = {
#include "builtin_scenarios.inc"
    };
    std::vector<BuiltinScenario> out;
    for (const auto& [name, text] : raw) {
      const ScenarioConfig c = parse_scenario_text(text, name);
      out.push_back({c.name, c.description, text});
    }
    return out;
  }();
  return all;
}

ScenarioConfig builtin_scenario(const std::string& name) {
  for (const auto& s : list_scenarios())
    if (s.name == name) return parse_scenario_text(s.text, name);
  throw std::out_of_range("no built-in scenario named '" + name + "'");
}

Immersion build_initial(const ScenarioConfig& config) { return build_initial_state(config).immersion; }

std::string check_json(const CheckResult& check) { return check_object(check).dump(2); }

ScenarioOutcome run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  ScenarioOutcome outcome;
  json summary;
  summary["scenario"] = config.name;
  summary["description"] = config.description;
  summary["ambient"] = config.ambient;
  summary["family"] = config.family;
  summary["resolution"] = config.resolution;
  summary["seed"] = config.seed;

  const InitialState init = build_initial_state(config);
  const Immersion& initial = init.immersion;
  const bool negative_control = config.expect_failure == "singularity";
  summary["negative_control"] = negative_control;
  summary["dim"] = initial.dim();
  summary["scalar_curvature"] = initial.space().scalar_curvature();
  summary["curvature_bound"] = initial.space().curvature_bounds()[0];
  if (init.correction)
    summary["exactness_correction"] = {{"flux", vec_json(init.correction->flux)},
                                       {"probe_holonomy_before", vec_json(init.correction->initial_holonomy)},
                                       {"probe_holonomy_after", vec_json(init.correction->final_holonomy)}};

  const GeometryCache geo0 = geometry(initial);
  bool exact = false;
  double holonomy0 = std::numeric_limits<double>::quiet_NaN();
  std::optional<AnglePotential> angle0;
  try {
    angle0 = angle_potential(initial, geo0, config.flow.angle);
    exact = angle0->exact;
    holonomy0 = angle0->holonomy.cwiseAbs().maxCoeff();
  } catch (const NotClosed&) {
  }
  summary["exact_initial"] = exact;
  summary["holonomy_initial"] = holonomy0;

  outcome.trace = run(initial, config.flow);
  const FlowTrace& trace = outcome.trace;
  const auto& rows = trace.rows;
  summary["status"] = to_string(trace.status);
  summary["steps"] = trace.steps;
  summary["dt_initial"] = trace.dt_initial;
  summary["t_final"] = rows.empty() ? 0.0 : rows.back().t;
  summary["final_max_h"] = rows.empty() ? 0.0 : rows.back().max_h;
  summary["final_l2h"] = rows.empty() ? 0.0 : rows.back().l2h;
  if (trace.status == FlowStatus::Failed)
    summary["error"] = {{"kind", trace.error_kind}, {"message", trace.error_message}, {"time", trace.failure_time}};
  summary["fit_window"] = {{"l2h_min", config.fit.l2h_min},
                           {"l2h_max", config.fit.l2h_max},
                           {"t_min", config.fit.t_min},
                           {"t_max", config.fit.t_max}};

  // Monitors over the trace.
  std::vector<CheckResult>& checks = outcome.checks;
  checks = trace_checks(trace, exact);
  checks.push_back(eigenvalue_short_time_check(rows, 0.25 * config.flow.t_max));

  // Monitors over stored states.
  std::vector<Immersion> states;
  states.push_back(initial);
  for (const Immersion& s : trace.snapshots)
    if (s.time() > initial.time()) states.push_back(s);
  if (trace.final_state && trace.final_state->time() > states.back().time()) states.push_back(*trace.final_state);

  NoncollapseOptions nc;
  nc.sample_count = config.noncollapse_samples;
  nc.seed = config.seed;
  Aggregate c0, vfield, membership;
  int members = 0;
  const ImmersionClass cls = config.class_kind == "B" ? ImmersionClass::B : ImmersionClass::A;
  for (const Immersion& s : states) {
    GeometryCache g;
    try {
      g = geometry(s);
    } catch (const Error&) {
      ++c0.skipped;
      ++vfield.skipped;
      continue;
    }
    const double kappa = noncollapse_estimate(g, config.class_params.r, nc);
    try {
      c0.add(c0_from_l2_check(g, kappa, config.class_params.r), s.time());
    } catch (const ScaleViolation&) {
      ++c0.skipped;
    }
    vfield.add(vector_field_inequality_suite(g, s, config.vector_field_trials, config.seed), s.time());
    if (config.class_kind != "none") {
      CheckResult m = class_membership(s, config.class_params, cls, nc);
      if (m.pass) ++members;
      membership.add(std::move(m), s.time());
    }
  }
  checks.push_back(c0.finish("c0_from_l2", "L2 norm above r^(n+2) at every stored state"));
  checks.push_back(vfield.finish("vector_field_inequality", "no valid stored state"));
  if (config.class_kind != "none") {
    CheckResult m = membership.finish(cls == ImmersionClass::B ? "class_B_membership" : "class_A_membership",
                                      "no valid stored state");
    m.required = false;
    m.pass = true;
    m.witness("members", members);
    m.note = "audit over stored states; margin is the worst membership margin";
    checks.push_back(std::move(m));
  }
  if (negative_control)
    for (CheckResult& c : checks) c.required = false;

  // Expectations.
  std::vector<Expectation>& ex = outcome.expectations;
  if (negative_control) {
    Expectation e;
    e.name = "singularity";
    e.observed = trace.failure_time;
    e.target = 0.5 * (config.expect_failure_t_min + config.expect_failure_t_max);
    e.tolerance = 0.5 * (config.expect_failure_t_max - config.expect_failure_t_min);
    const bool kind_ok = trace.error_kind == "DegenerateMetric" || trace.error_kind == "DefectBlowup";
    e.pass = trace.status == FlowStatus::Failed && kind_ok && trace.failure_time >= config.expect_failure_t_min &&
             trace.failure_time <= config.expect_failure_t_max;
    e.detail = trace.status == FlowStatus::Failed ? trace.error_kind + ": " + trace.error_message
                                                  : "flow ended without a singularity (" + to_string(trace.status) + ")";
    ex.push_back(e);
  } else {
    try {
      outcome.fit = decay_rate_fit(rows, config.fit);
    } catch (const WindowTooShort& e) {
      summary["fit_error"] = e.what();
    }
    if (outcome.fit) summary["decay_fit"] = fit_json(*outcome.fit);

    std::optional<double> target = config.expect_slope;
    if (config.expect_slope_from_spectrum) {
      // λ of the eigenpair carrying most of θ(0). The linearized decay is set
      // by the minimal base (s = 0 of the family), so its spectrum is the
      // oracle; the initial state's own spectrum is reported alongside.
      if (angle0) {
        const Eigen::VectorXd& th = angle0->theta;
        auto dominant = [&th](const GeometryCache& g) {
          const DiscreteLaplacian lap(g);
          const double rq = -weighted_dot(g, th, lap.apply(th)) / weighted_dot(g, th, th);
          const Spectrum near = eigenpairs_near(g, rq, 6);
          int best = 0;
          double best_a = -1.0;
          for (int i = 0; i < near.size(); ++i) {
            const double a = std::abs(weighted_dot(g, th, near.eigenfunctions.col(i)));
            if (a > best_a) {
              best_a = a;
              best = i;
            }
          }
          return std::make_pair(near.eigenvalues[static_cast<std::size_t>(best)], rq);
        };
        const auto [lambda_initial, rq_initial] = dominant(geo0);
        double lambda_mode = lambda_initial;
        const auto gen = generating_potential(config, initial.space_ptr());
        if (gen) {
          const auto [lambda_base, rq_base] = dominant(geometry(gen->first));
          lambda_mode = lambda_base;
          summary["theta_rayleigh_quotient_base"] = rq_base;
        }
        const double half = initial.space().scalar_curvature() / (2.0 * initial.dim());
        target = -2.0 * (lambda_mode - half);
        summary["lambda_mode"] = lambda_mode;
        summary["lambda_mode_initial_state"] = lambda_initial;
        summary["theta_rayleigh_quotient"] = rq_initial;
      } else {
        summary["lambda_mode_error"] = "initial mean curvature form not closed";
      }
    }
    if (config.expect_slope || config.expect_slope_from_spectrum) {
      Expectation e;
      e.name = "decay_slope";
      e.tolerance = config.expect_slope_tol;
      e.target = target.value_or(std::numeric_limits<double>::quiet_NaN());
      if (outcome.fit && target) {
        e.observed = outcome.fit->slope;
        e.pass = std::abs(e.observed - *target) <= config.expect_slope_tol * std::abs(*target);
      } else {
        e.observed = std::numeric_limits<double>::quiet_NaN();
        e.detail = outcome.fit ? "no slope target" : "decay fit failed";
      }
      ex.push_back(e);
    }
    if (config.expect_slope_abs_max) {
      Expectation e;
      e.name = "neutral_slope";
      e.target = 0.0;
      e.tolerance = *config.expect_slope_abs_max;
      if (outcome.fit) {
        e.observed = outcome.fit->slope;
        e.pass = std::abs(e.observed) < e.tolerance;
      } else {
        e.observed = std::numeric_limits<double>::quiet_NaN();
        e.detail = "decay fit failed";
      }
      ex.push_back(e);
    }
    if (config.expect_converged) {
      Expectation e;
      e.name = "converged";
      e.target = config.flow.conv_tol;
      e.observed = rows.empty() ? 0.0 : rows.back().max_h;
      e.pass = trace.status == FlowStatus::Converged;
      e.detail = to_string(trace.status);
      ex.push_back(e);
    }
    if (config.expect_final_max_h) {
      Expectation e;
      e.name = "final_max_h";
      e.target = *config.expect_final_max_h;
      e.observed = rows.empty() ? std::numeric_limits<double>::quiet_NaN() : rows.back().max_h;
      e.pass = trace.status != FlowStatus::Failed && e.observed < e.target;
      ex.push_back(e);
    }
    Expectation e;
    e.name = "theorem_checks";
    int failed = 0;
    for (const CheckResult& c : checks)
      if (c.required && !c.pass) {
        ++failed;
        e.detail += (e.detail.empty() ? "failed: " : ", ") + c.name;
      }
    e.observed = failed;
    e.pass = failed == 0;
    ex.push_back(e);
  }
  if (config.expect_essential) {
    Expectation e;
    e.name = "essential";
    e.target = *config.expect_essential ? 1.0 : 0.0;
    const auto gen = generating_potential(config, build_space(config));
    if (gen) {
      const GeometryCache gb = geometry(gen->first);
      const VariationClass vc = classify_variation(gb, lowest_eigenpairs(gb, 12), gen->second);
      e.observed = vc.essential ? 1.0 : 0.0;
      e.pass = vc.essential == *config.expect_essential;
      std::ostringstream d;
      d << std::setprecision(6) << "perpendicular fraction "
        << std::sqrt(std::max(0.0, weighted_dot(gb, vc.perpendicular, vc.perpendicular))) / vc.norm;
      e.detail = d.str();
    } else {
      e.detail = "family has no generating potential";
    }
    ex.push_back(e);
  }

  bool all_pass = true;
  for (const Expectation& e : ex) all_pass = all_pass && e.pass;
  if (!negative_control && trace.status == FlowStatus::Failed)
    outcome.exit_code = kExitFlowError;
  else
    outcome.exit_code = all_pass ? kExitPass : kExitExpectation;

  json jex = json::array();
  for (const Expectation& e : ex) {
    json o{{"name", e.name}, {"pass", e.pass}, {"observed", e.observed}, {"target", e.target}, {"tolerance", e.tolerance}};
    if (!e.detail.empty()) o["detail"] = e.detail;
    jex.push_back(o);
  }
  summary["expectations"] = jex;
  json jchecks = json::array();
  json full = json::array();
  for (const CheckResult& c : checks) {
    jchecks.push_back({{"name", c.name}, {"pass", c.pass}, {"required", c.required}, {"margin", c.margin}});
    full.push_back(check_object(c));
  }
  summary["checks"] = jchecks;
  summary["verdict"] = outcome.exit_code == kExitPass ? "pass" : "fail";
  summary["exit_code"] = outcome.exit_code;
  summary["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  outcome.summary_json = summary.dump(2);
  outcome.checks_json = full.dump(2);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir / "snapshots");
    {
      std::ofstream f(out_dir / "trace.csv");
      trace.write_csv(f);
    }
    {
      std::ofstream f(out_dir / "trace_aux.csv");
      trace.write_aux_csv(f);
    }
    write_text(out_dir / "summary.json", outcome.summary_json + "\n");
    write_text(out_dir / "checks.json", outcome.checks_json + "\n");
    int k = 0;
    for (const Immersion& s : trace.snapshots) {
      std::ostringstream name;
      name << "snapshot_" << std::setw(4) << std::setfill('0') << k++ << ".csv";
      std::ofstream f(out_dir / "snapshots" / name.str());
      try {
        write_snapshot_csv(f, s, geometry(s));
      } catch (const Error&) {
      }
    }
  }
  return outcome;
}

std::string check_trace(const std::filesystem::path& trace_csv, bool& all_pass) {
  std::ifstream in(trace_csv);
  if (!in) throw ParseError("cannot open " + trace_csv.string());
  FlowTrace trace;
  trace.rows = read_trace_csv(in);
  const auto dir = trace_csv.parent_path();
  const auto aux = dir / "trace_aux.csv";
  const bool have_aux = std::filesystem::exists(aux);
  if (have_aux) {
    std::ifstream a(aux);
    read_aux_csv(a, trace.rows);
  }
  const auto summary_path = dir / "summary.json";
  if (!std::filesystem::exists(summary_path))
    throw ParseError("check needs summary.json next to " + trace_csv.string() + " for the dimension and scalar curvature");
  json summary;
  try {
    std::ifstream s(summary_path);
    summary = json::parse(s);
    trace.dim = summary.at("dim").get<int>();
    trace.scalar_curvature = summary.at("scalar_curvature").get<double>();
    trace.curvature_bound = summary.at("curvature_bound").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(summary_path.string() + ": " + e.what());
  }
  const bool exact = summary.value("exact_initial", false);
  std::vector<CheckResult> checks = trace_checks(trace, exact);
  if (!have_aux)
    for (CheckResult& c : checks)
      if (c.name == "eigen_bound" || c.name == "volume_form_bound") {
        c.required = false;
        c.note = "not applicable: trace_aux.csv missing";
        c.pass = true;
      }
  FitWindow window;
  if (summary.contains("fit_window")) {
    const json& w = summary["fit_window"];
    auto num = [&](const char* key, double fallback) {
      return w.contains(key) && w[key].is_number() ? w[key].get<double>() : fallback;
    };
    window.l2h_min = num("l2h_min", window.l2h_min);
    window.l2h_max = num("l2h_max", window.l2h_max);
    window.t_min = num("t_min", window.t_min);
    window.t_max = num("t_max", window.t_max);
  }
  CheckResult fit;
  fit.name = "decay_rate_fit";
  fit.required = false;
  try {
    const DecayFit f = decay_rate_fit(trace.rows, window);
    fit.margin = f.slope;
    fit.witness("slope", f.slope);
    fit.witness("ci_low", f.ci_low);
    fit.witness("ci_high", f.ci_high);
    fit.witness("samples", f.samples);
    fit.note = "margin is the fitted slope";
  } catch (const WindowTooShort& e) {
    fit.pass = false;
    fit.note = e.what();
  }
  checks.push_back(fit);
  const bool negative = summary.value("negative_control", false);
  all_pass = true;
  json out = json::array();
  for (CheckResult& c : checks) {
    if (negative) c.required = false;
    if (c.required && !c.pass) all_pass = false;
    out.push_back(check_object(c));
  }
  return out.dump(2);
}

}  // namespace lmcf
