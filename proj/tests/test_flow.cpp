#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lmcf/errors.hpp"
#include "lmcf/flow.hpp"
#include "support.hpp"

using namespace lmcf;
using namespace lmcf::test;

namespace {

// State at time t after flowing with the default CFL number.
Immersion flow_to(const Immersion& initial, double t) {
  FlowConfig c;
  c.t_max = t;
  c.monitor_stride = 1000000;
  const FlowTrace tr = run(initial, c);
  REQUIRE(tr.status == FlowStatus::ReachedTMax);
  return *tr.final_state;
}

// One explicit step of exactly dt.
Immersion step_by(const Immersion& state, double dt) { return step(state, dt); }

double max_log_slope(const FlowTrace& tr, double t0, double t1) {
  // Mean slope of log ∫|H|² between the first rows past t0 and t1.
  const TraceRow* a = nullptr;
  const TraceRow* b = nullptr;
  for (const TraceRow& r : tr.rows) {
    if (!a && r.t >= t0) a = &r;
    if (!b && r.t >= t1) b = &r;
  }
  REQUIRE(a);
  REQUIRE(b);
  return (std::log(b->l2h) - std::log(a->l2h)) / (b->t - a->t);
}

}  // namespace

TEST_CASE("cfl_dt formula") {
  CHECK(cfl_dt(straight_line(flat(), 64), 0.5) == doctest::Approx(0.5 / (64.0 * 64.0) / 2.0).epsilon(1e-12));

  // Circle: same g_aa, |A|² = 1/r² shrinks dt by 1/(1 + 25).
  const double r = 0.2;
  const double plain = 0.5 * std::pow(2.0 * kPi * r / 128.0, 2) / 2.0;
  CHECK(cfl_dt(flat_circle(flat(), 128, r), 0.5) == doctest::Approx(plain / 26.0).epsilon(1e-3));

  const double dt = cfl_dt(clifford_torus(cp2(), 64), 0.5);
  CHECK(dt > 0.0);
  CHECK(dt <= 1e-4);
}

TEST_CASE("flow configuration validation") {
  FlowConfig c;
  CHECK_NOTHROW(c.validate());
  c.cfl = 1.5;
  c.defect_tol = 0.0;
  try {
    c.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("cfl") != std::string::npos);
    CHECK(what.find("defect_tol") != std::string::npos);
  }
  CHECK_THROWS_AS(run(straight_line(flat(), 32), c), ValidationError);
}

TEST_CASE("straight line is a fixed point") {
  const Immersion line = straight_line(flat(), 64);
  const Immersion next = step(line, cfl_dt(line, 0.5));
  CHECK((next.coords() - line.coords()).cwiseAbs().maxCoeff() < 1e-12);

  FlowConfig c;
  c.t_max = 0.1;
  c.monitor_stride = 1;
  c.conv_sustain = 1;
  const FlowTrace tr = run(line, c);
  CHECK(tr.status == FlowStatus::Converged);
  CHECK(tr.rows.back().t == 0.0);
  CHECK(tr.rows.back().l2h == 0.0);
}

TEST_CASE("near-minimal states barely move") {
  const Immersion equator = great_circle(128);
  const double dt = cfl_dt(equator, 0.5);
  const Immersion next = step(equator, dt);
  CHECK((next.coords() - equator.coords()).cwiseAbs().maxCoeff() < 1e-6 * dt);
}

TEST_CASE("shrinking circle follows r² = r0² - 2t") {
  const Immersion circle = flat_circle(flat(), 128, 0.2);
  const Immersion later = flow_to(circle, 0.005);
  CHECK(later.time() == doctest::Approx(0.005));
  double mean = 0.0;
  for (int p = 0; p < later.node_count(); ++p) mean += (later.point(p) - AmbVec::Constant(2, 0.5)).norm();
  mean /= later.node_count();
  CHECK(mean == doctest::Approx(std::sqrt(0.03)).epsilon(5e-3));
}

TEST_CASE("contractible circle develops a singularity near r0²/2") {
  FlowConfig c;
  c.t_max = 0.05;
  c.monitor_stride = 50;
  c.collapse_ratio = 0.1;
  const FlowTrace tr = run(flat_circle(flat(), 32, 0.2), c);
  CHECK(tr.status == FlowStatus::Failed);
  const bool kind_ok = tr.error_kind == "DegenerateMetric" || tr.error_kind == "DefectBlowup";
  CHECK(kind_ok);
  CHECK(tr.failure_time == doctest::Approx(0.02).epsilon(0.1));
  REQUIRE(tr.final_state);
  CHECK(tr.rows.back().t <= tr.failure_time);
}

TEST_CASE("great circle mode 2 decays at the Jacobi rate") {
  FlowConfig c;
  c.t_max = 1.0;
  c.monitor_stride = 20;
  const FlowTrace tr = run(perturbed_great_circle(sphere(), 64, 0.01, 2), c);
  // ∫|H|² ∝ e^{-2(m²-1)t}.
  CHECK(max_log_slope(tr, 0.2, 0.8) == doctest::Approx(-6.0).epsilon(0.05));
}

TEST_CASE("volume decreases along S1 and max|H| falls below 1e-6") {
  FlowConfig c;
  c.t_max = 0.4;
  c.monitor_stride = 20;
  const FlowTrace tr = run(graph_curve(flat(), 64, 0.01, 1), c);
  CHECK(tr.status == FlowStatus::Converged);
  for (std::size_t i = 1; i < tr.rows.size(); ++i) CHECK(tr.rows[i].vol <= tr.rows[i - 1].vol + 1e-10 * tr.rows[0].vol);
  CHECK(tr.rows.back().max_h < 1e-6);
  for (std::size_t i = 1; i < tr.rows.size(); ++i) CHECK(tr.rows[i].e_accum >= tr.rows[i - 1].e_accum);
}

TEST_CASE("angle evolution residual on S1") {
  const Immersion a = flow_to(graph_curve(flat(), 128, 0.01, 1), 0.01);
  const Immersion b = step_by(a, 1e-4 / 2);
  const Immersion c = step_by(b, 1e-4 / 2);
  const Residual r = residual_theta(a, c);
  CHECK(r.value < 1e-2 * r.scale);
  CHECK(r.scale > 0.0);

  // Minimal state: θ ≈ 0 and the residual vanishes.
  const Immersion line = straight_line(flat(), 64);
  CHECK(residual_theta(line, step(line, 1e-5)).value < 1e-8);
}

TEST_CASE("angle evolution residual on the hyperbolic cylinder is of the S1 order") {
  const Immersion a = flow_to(cylinder_curve(cylinder(), 128, 0.01, 1), 0.01);
  const Immersion b = step_by(a, 1e-4);
  const Residual r = residual_theta(a, b);
  CHECK(r.value < 1e-2 * r.scale);
}

TEST_CASE("mean curvature evolution residual") {
  SUBCASE("straight line") {
    const Immersion line = straight_line(flat(), 64);
    CHECK(residual_mean_curvature(line, step(line, 1e-5)).value < 1e-12);
  }
  SUBCASE("S1 refinement at fixed dt/du²") {
    double coarse = 0.0;
    double fine = 0.0;
    for (int n : {64, 128}) {
      const Immersion a = flow_to(graph_curve(flat(), n, 0.01, 1), 0.01);
      const double delta = 0.1 / (static_cast<double>(n) * n);
      const Residual r = residual_mean_curvature(a, step_by(a, delta));
      (n == 64 ? coarse : fine) = r.value;
    }
    CAPTURE(coarse);
    CAPTURE(fine);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.3));
  }
  SUBCASE("sphere: the ambient curvature term is necessary") {
    const Immersion a = flow_to(perturbed_great_circle(sphere(), 128, 0.01, 2), 0.05);
    const Immersion b = step_by(a, 1e-5);
    const Residual with = residual_mean_curvature(a, b, true);
    const Residual without = residual_mean_curvature(a, b, false);
    CAPTURE(with.value);
    CAPTURE(without.value);
    CHECK(without.value >= 10.0 * with.value);
    CHECK(with.value < 1e-2 * with.scale);

    const Immersion a2 = flow_to(perturbed_great_circle(sphere(), 64, 0.01, 2), 0.05);
    const Residual coarse = residual_mean_curvature(a2, step_by(a2, 4e-5), true);
    CHECK(coarse.value / with.value == doctest::Approx(4.0).epsilon(0.3));
  }
}

TEST_CASE("trace csv round trip and determinism") {
  FlowConfig c;
  c.t_max = 0.02;
  c.monitor_stride = 10;
  c.eigen_stride = 2;
  c.residual_stride = 2;
  const Immersion init = graph_curve(flat(), 32, 0.01, 1);
  const FlowTrace a = run(init, c);
  const FlowTrace b = run(init, c);
  std::ostringstream sa;
  std::ostringstream sb;
  a.write_csv(sa);
  b.write_csv(sb);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind(kTraceHeader, 0) == 0);

  std::istringstream in(sa.str());
  const auto rows = read_trace_csv(in);
  REQUIRE(rows.size() == a.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].t == a.rows[i].t);
    CHECK(rows[i].l2h == a.rows[i].l2h);
    CHECK(std::isnan(rows[i].lambda1) == std::isnan(a.rows[i].lambda1));
  }

  std::ostringstream aux;
  a.write_aux_csv(aux);
  std::istringstream aux_in(aux.str());
  auto merged = rows;
  read_aux_csv(aux_in, merged);
  CHECK(merged.back().max_grad_h == a.rows.back().max_grad_h);
  CHECK(merged.back().step == a.rows.back().step);

  std::istringstream bad("t,vol\n1,2\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ParseError);
}

TEST_CASE("volume form lower bound holds on S1") {
  FlowConfig c;
  c.t_max = 0.1;
  c.monitor_stride = 20;
  const FlowTrace tr = run(graph_curve(flat(), 64, 0.01, 1), c);
  for (const TraceRow& r : tr.rows) CHECK(r.min_volume_ratio >= std::exp(-2.0 * r.e_accum) * 0.95);
}
