#include <doctest.h>

#include <cmath>
#include <limits>

#include "lmcf/deformations.hpp"
#include "lmcf/errors.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/monitors.hpp"
#include "support.hpp"

using namespace lmcf;
using namespace lmcf::test;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FlowTrace s1_trace(int n, double t_max, int eigen_stride = 0) {
  FlowConfig c;
  c.t_max = t_max;
  c.monitor_stride = 10;
  c.eigen_stride = eigen_stride;
  c.stop_on_convergence = false;
  return run(graph_curve(flat(), n, 0.01, 1), c);
}

double witness(const CheckResult& r, const std::string& key) {
  for (const auto& [k, v] : r.witnesses)
    if (k == key) return v;
  FAIL("missing witness " << key);
  return 0.0;
}

}  // namespace

TEST_CASE("noncollapse estimate") {
  SUBCASE("straight line") {
    const Immersion line = straight_line(flat(), 128);
    for (double r : {0.1, 0.2, 0.4}) CHECK(noncollapse_estimate(line, r) == doctest::Approx(2.0).epsilon(1e-2));
  }
  SUBCASE("circle of radius 0.2") {
    CHECK(noncollapse_estimate(flat_circle(flat(), 256, 0.2), 0.1) == doctest::Approx(2.0).epsilon(2e-2));
  }
  SUBCASE("flat identity torus") {
    const Immersion torus = flat_identity_torus(flat(2), 64);
    CHECK(noncollapse_estimate(torus, 0.2) == doctest::Approx(kPi).epsilon(0.1));
    NoncollapseOptions axis;
    axis.stencil = 8;
    // The octagonal 8-neighbour ball sits right at the edge of the band.
    CHECK(noncollapse_estimate(torus, 0.2, axis) == doctest::Approx(kPi).epsilon(0.12));
  }
  SUBCASE("bad options") {
    const Immersion line = straight_line(flat(), 32);
    CHECK_THROWS_AS(noncollapse_estimate(line, 0.0), std::invalid_argument);
    NoncollapseOptions bad;
    bad.stencil = 4;
    CHECK_THROWS_AS(noncollapse_estimate(line, 0.1, bad), std::invalid_argument);
  }
}

TEST_CASE("class membership") {
  SUBCASE("Clifford torus is in class A") {
    ClassParams p;
    p.kappa = 1.0;
    p.r = 0.3;
    p.lambda_a = 5.0;
    p.eps = 0.01;
    const CheckResult r = class_membership(clifford_torus(cp2(), 64), p, ImmersionClass::A);
    CHECK(r.pass);
    CHECK(witness(r, "kappa_hat") >= 1.0);
  }
  SUBCASE("shrinking circle is not") {
    ClassParams p;
    p.kappa = 1.0;
    p.r = 0.05;
    p.lambda_a = 100.0;
    p.eps = 0.01;
    const CheckResult r = class_membership(flat_circle(flat(), 128, 0.05), p, ImmersionClass::A);
    CHECK_FALSE(r.pass);
    CHECK(witness(r, "max_h") == doctest::Approx(20.0).epsilon(1e-2));
  }
  SUBCASE("S1 initial state is in class B") {
    ClassParams p;
    p.kappa = 1.0;
    p.r = 0.2;
    p.lambda_a = 1.0;
    p.eps = 1.0;
    p.delta = 2.0 * kPi * kPi;
    const CheckResult r = class_membership(graph_curve(flat(), 128, 0.01, 1), p, ImmersionClass::B);
    CHECK(r.pass);
    CHECK(witness(r, "lambda1") == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-2));
    CHECK(witness(r, "exact") == 1.0);
  }
  SUBCASE("non-exact curve fails class B") {
    ClassParams p;
    p.r = 0.1;
    p.lambda_a = 10.0;
    p.eps = 10.0;
    p.delta = 1.0;
    CHECK_FALSE(class_membership(flat_circle(flat(), 64, 0.2), p, ImmersionClass::B).pass);
  }
  SUBCASE("parameters are validated") {
    ClassParams p;
    p.kappa = -1.0;
    p.eps = 0.0;
    CHECK_THROWS_AS(p.validate(false), ValidationError);
    ClassParams q;
    CHECK_THROWS_AS(q.validate(true), ValidationError);  // δ = 0
  }
}

TEST_CASE("Gronwall inequality") {
  SUBCASE("S1, exact form") {
    const FlowTrace tr = s1_trace(64, 0.2, 5);
    const CheckResult plain = gronwall_check(tr, false);
    const CheckResult exact = gronwall_check(tr, true);
    CHECK(plain.pass);
    CHECK(exact.pass);
    CHECK(exact.margin < plain.margin);
  }
  SUBCASE("S4 cylinder") {
    FlowConfig c;
    c.t_max = 2.0;
    c.monitor_stride = 20;
    const FlowTrace tr = run(cylinder_curve(cylinder(), 64, 0.01, 1), c);
    CHECK(gronwall_check(tr, false).pass);
    CHECK(gronwall_check(tr, false).margin > 0.0);
  }
  SUBCASE("minimal state") {
    FlowConfig c;
    c.t_max = 0.01;
    c.monitor_stride = 5;
    c.stop_on_convergence = false;
    const FlowTrace tr = run(straight_line(flat(), 32), c);
    CHECK(gronwall_check(tr, true).pass);
  }
}

TEST_CASE("decay rate fit") {
  const FlowTrace tr = s1_trace(64, 0.3);
  const DecayFit fit = decay_rate_fit(tr.rows);
  CHECK(fit.slope == doctest::Approx(-8.0 * kPi * kPi).epsilon(0.1));
  CHECK(fit.gamma == doctest::Approx(4.0 * kPi * kPi).epsilon(0.1));
  CHECK(fit.ci_low <= fit.slope);
  CHECK(fit.ci_high >= fit.slope);
  CHECK(fit.samples >= 20);

  std::vector<TraceRow> few(tr.rows.begin(), tr.rows.begin() + 10);
  CHECK_THROWS_AS(decay_rate_fit(few), WindowTooShort);
  FitWindow narrow;
  narrow.t_max = 1e-9;
  CHECK_THROWS_AS(decay_rate_fit(tr.rows, narrow), WindowTooShort);
}

TEST_CASE("eigenvalue lower bound") {
  SUBCASE("S1") {
    const FlowTrace tr = s1_trace(64, 0.2, 5);
    const CheckResult r = eigen_bound_check(tr);
    CHECK(r.pass);
    for (const TraceRow& row : tr.rows)
      if (!std::isnan(row.lambda1)) CHECK(row.lambda1 == doctest::Approx(tr.rows[0].lambda1).epsilon(0.02));
  }
  SUBCASE("minimal state") {
    FlowConfig c;
    c.t_max = 0.01;
    c.monitor_stride = 5;
    c.eigen_stride = 1;
    c.stop_on_convergence = false;
    const FlowTrace tr = run(great_circle(64), c);
    CHECK(eigen_bound_check(tr).pass);
  }
  SUBCASE("needs lambda1 at t = 0") {
    const FlowTrace tr = s1_trace(32, 0.05, 0);
    const CheckResult r = eigen_bound_check(tr);
    CHECK(r.pass);
    CHECK_FALSE(r.note.empty());
  }
}

TEST_CASE("C0 bound from the L2 norm") {
  SUBCASE("S1 at t = 0.05") {
    FlowConfig c;
    c.t_max = 0.05;
    c.monitor_stride = 1000000;
    const FlowTrace tr = run(graph_curve(flat(), 128, 0.01, 1), c);
    const GeometryCache geo = geometry(*tr.final_state);
    const double kappa = noncollapse_estimate(geo, 0.2);
    CHECK(c0_from_l2_check(geo, kappa, 0.2).margin > 0.0);
  }
  SUBCASE("minimal state has margin 0") {
    const GeometryCache geo = geometry(straight_line(flat(), 64));
    const CheckResult r = c0_from_l2_check(geo, 2.0, 0.2);
    CHECK(r.pass);
    CHECK(r.margin == 0.0);
  }
  SUBCASE("scale violation") {
    const GeometryCache geo = geometry(flat_circle(flat(), 64, 0.2));
    CHECK_THROWS_AS(c0_from_l2_check(geo, 2.0, 0.1), ScaleViolation);
  }
}

TEST_CASE("vector field inequality") {
  SUBCASE("X = 0") {
    const Immersion torus = minimal_clifford(16);
    const GeometryCache geo = geometry(torus);
    const CheckResult r = vector_field_inequality_check(geo, torus, Eigen::MatrixXd::Zero(2, torus.node_count()));
    CHECK(r.pass);
    CHECK(witness(r, "lhs") == 0.0);
    CHECK(witness(r, "rhs") == 0.0);
  }
  SUBCASE("X = H on S1") {
    const Immersion curve = graph_curve(flat(), 128, 0.01, 1);
    const GeometryCache geo = geometry(curve);
    const CheckResult r = vector_field_inequality_check(geo, curve, mean_curvature_field(geo));
    CHECK(r.pass);
    CHECK(r.margin >= -kInequalityTolerance);
  }
  SUBCASE("random fields on the Clifford torus") {
    const Immersion torus = minimal_clifford(32);
    const GeometryCache geo = geometry(torus);
    for (unsigned seed = 1; seed <= 20; ++seed) {
      const CheckResult r = vector_field_inequality_check(geo, torus, random_tangent_field(torus.topology(), seed));
      CAPTURE(seed);
      CHECK(r.pass);
    }
    const CheckResult suite = vector_field_inequality_suite(geo, torus, 20, 1);
    CHECK(suite.pass);
  }
  SUBCASE("random fields on a deformed torus") {
    const Immersion torus = deform(minimal_clifford(32), named_potential(GridTopology({32, 32}), "cos", 1.0, 2, 0), 0.02);
    const GeometryCache geo = geometry(torus);
    CHECK(vector_field_inequality_suite(geo, torus, 5, 3).pass);
  }
  SUBCASE("shape mismatch") {
    const Immersion torus = minimal_clifford(16);
    CHECK_THROWS_AS(vector_field_inequality_check(geometry(torus), torus, Eigen::MatrixXd::Zero(2, 3)),
                    std::invalid_argument);
  }
}

TEST_CASE("short-time doubling") {
  CHECK(short_time_doubling(s1_trace(64, 0.1).rows) == kInf);

  FlowConfig c;
  c.t_max = 0.05;
  c.monitor_stride = 5;
  c.collapse_ratio = 0.1;
  const FlowTrace circle = run(flat_circle(flat(), 64, 0.2), c);
  CHECK(short_time_doubling(circle.rows) == doctest::Approx(3.0 * 0.04 / 8.0).epsilon(0.03));
  CHECK(short_time_doubling_check(circle.rows).pass);

  FlowConfig m;
  m.t_max = 0.01;
  m.monitor_stride = 5;
  m.stop_on_convergence = false;
  CHECK(short_time_doubling(run(straight_line(flat(), 32), m).rows) == kInf);
}

TEST_CASE("trace invariants on S1") {
  const FlowTrace tr = s1_trace(64, 0.2, 5);
  CHECK(volume_monotonicity_check(tr.rows).pass);
  CHECK(energy_monotonicity_check(tr.rows).pass);
  CHECK(volume_form_check(tr).pass);
  CHECK(defect_drift_check(tr.rows).pass);
  CHECK(eigenvalue_short_time_check(tr.rows, 0.05).pass);

  std::vector<TraceRow> rising = tr.rows;
  rising[3].vol += 1e-3;
  CHECK_FALSE(volume_monotonicity_check(rising).pass);
  std::vector<TraceRow> falling = tr.rows;
  falling[3].e_accum = -1.0;
  CHECK_FALSE(energy_monotonicity_check(falling).pass);
  std::vector<TraceRow> drift = tr.rows;
  drift.back().defect = 1.0;
  CHECK_FALSE(defect_drift_check(drift).pass);
}
