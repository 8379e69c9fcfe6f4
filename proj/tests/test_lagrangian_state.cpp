#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "lmcf/deformations.hpp"
#include "lmcf/errors.hpp"
#include "lmcf/geometry.hpp"
#include "support.hpp"

using namespace lmcf;
using namespace lmcf::test;

namespace {

// max over nodes and i of |ḡ(H, e_i)| / (|H|_ḡ |e_i|_ḡ), evaluated from the raw vectors.
double tangential_part_of_h(const Immersion& imm, const GeometryCache& geo) {
  double worst = 0.0;
  for (int p = 0; p < imm.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    const AmbMat g = imm.space().metric(imm.point(p));
    const AmbVec& h = ng.mean_curvature_vector;
    const double hn = std::sqrt(h.dot(g * h));
    if (hn < 1e-12) continue;
    for (int i = 0; i < geo.dim; ++i) {
      const AmbVec& e = ng.frame[static_cast<std::size_t>(i)];
      worst = std::max(worst, std::abs(h.dot(g * e)) / (hn * std::sqrt(e.dot(g * e))));
    }
  }
  return worst;
}

// S3-style perturbed Clifford torus.
Immersion perturbed_clifford(int n) {
  const Immersion base = minimal_clifford(n);
  return deform(base, named_potential(base.topology(), "cos", 1.0, 2, 0), 0.02);
}

}  // namespace

TEST_CASE("grid topology") {
  CHECK_THROWS_AS(GridTopology({8}), InvalidImmersion);
  CHECK_THROWS_AS(GridTopology({32, 15}), InvalidImmersion);
  const GridTopology top({16, 32});
  CHECK(top.node_count() == 512);
  CHECK(top.cell_volume() == doctest::Approx(1.0 / 512));
  const auto nb = top.shift(top.index(15, 0), 1, -1);
  CHECK(nb.node == top.index(0, 31));
  CHECK(nb.wraps[0] == 1);
  CHECK(nb.wraps[1] == -1);
}

TEST_CASE("families reject the wrong ambient") {
  CHECK_THROWS_AS(graph_curve(sphere(), 64, 0.01, 1), InvalidImmersion);
  CHECK_THROWS_AS(clifford_torus(flat(2), 32), InvalidImmersion);
  CHECK_THROWS_AS(straight_line(flat(), 8), InvalidImmersion);
}

TEST_CASE("straight line is a geodesic") {
  const Immersion line = straight_line(flat(), 64);
  const GeometryCache geo = geometry(line);
  CHECK(geo.max_abs_h() == 0.0);
  CHECK(geo.max_abs_a() == 0.0);
  CHECK(geo.max_defect() == 0.0);
  CHECK(lagrangian_defect(line) == 0.0);
  CHECK(closedness_residual(geo) == 0.0);
  const Integrals in = integrals(geo);
  CHECK(in.volume == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(in.l2_h == 0.0);
}

TEST_CASE("flat circle of radius 0.2") {
  const double r = 0.2;
  const Immersion circle = flat_circle(flat(), 128, r);
  const GeometryCache geo = geometry(circle);
  for (const auto& ng : geo.nodes) CHECK(std::abs(std::sqrt(ng.norm_h2) - 1.0 / r) < 1e-3 / r);
  const Integrals in = integrals(geo);
  CHECK(in.volume == doctest::Approx(2.0 * kPi * r).epsilon(1e-3));
  CHECK(in.l2_h == doctest::Approx(10.0 * kPi).epsilon(1e-3));
  CHECK(tangential_part_of_h(circle, geo) < 1e-10);

  // Total turning: holonomy ±2π, not exact.
  const AnglePotential ap = angle_potential(circle, geo);
  REQUIRE(ap.holonomy.size() == 1);
  CHECK(std::abs(ap.holonomy[0]) == doctest::Approx(2.0 * kPi).epsilon(1e-3));
  CHECK_FALSE(ap.exact);
}

TEST_CASE("great circle on the unit sphere") {
  const Immersion equator = sphere_circle(sphere(), 128, 1.0);
  const Integrals in = integrals(equator);
  CHECK(in.volume == doctest::Approx(2.0 * kPi).epsilon(1e-3));
  // Central differences leave |H| = O(Δu²) on the chart equator, so ∫|H|²
  // falls 16× per doubling.
  CHECK(in.l2_h < 1e-5);
  const double coarse = integrals(sphere_circle(sphere(), 64, 1.0)).l2_h;
  CHECK(coarse / in.l2_h == doctest::Approx(16.0).epsilon(0.3));

  const Immersion tuned = great_circle(128);
  CHECK(integrals(tuned).l2_h < 1e-20);
  CHECK(std::abs(discrete_equator_radius(sphere(), 128) - 1.0) < 1e-3);

  // Tilting breaks the chart symmetry: the residual mean curvature is truncation error.
  const double tilted = integrals(tilted_great_circle(sphere(), 128, 0.3)).max_h;
  const double tilted_coarse = integrals(tilted_great_circle(sphere(), 64, 0.3)).max_h;
  CHECK(tilted < 2e-3);
  CHECK(tilted_coarse / tilted == doctest::Approx(4.0).epsilon(0.3));
  CHECK(integrals(tilted_great_circle(sphere(), 128, 0.3)).volume == doctest::Approx(2.0 * kPi).epsilon(1e-3));
}

TEST_CASE("graph curve: exact angle equal to the tangent angle") {
  const double a = 0.01;
  const int n = 128;
  const Immersion curve = graph_curve(flat(), n, a, 1);
  const GeometryCache geo = geometry(curve);
  CHECK(geo.max_defect() < 1e-3);
  const AnglePotential ap = angle_potential(curve, geo);
  CHECK(std::abs(ap.holonomy[0]) < 1e-6);
  CHECK(ap.exact);

  Eigen::VectorXd phi(n);
  for (int p = 0; p < n; ++p) phi[p] = std::atan(2.0 * kPi * a * std::cos(2.0 * kPi * curve.topology().param(p, 0)));
  phi.array() -= weighted_mean(geo, phi);
  // θ agrees with the tangent angle up to orientation and a constant.
  const double err = std::min((ap.theta - phi).cwiseAbs().maxCoeff(), (ap.theta + phi).cwiseAbs().maxCoeff());
  CHECK(err < 1e-3 * phi.cwiseAbs().maxCoeff());
  CHECK(std::abs(weighted_mean(geo, ap.theta)) < 1e-12);
}

TEST_CASE("Clifford torus in CP2") {
  const GeometryCache g32 = geometry(clifford_torus(cp2(), 32));
  const Immersion c64 = clifford_torus(cp2(), 64);
  const GeometryCache g64 = geometry(c64);

  // Closed-form area (2π)²·√3/9 for holomorphic curvature 4.
  const double area = 4.0 * kPi * kPi * std::sqrt(3.0) / 9.0;
  CHECK(integrals(g64).volume == doctest::Approx(area).epsilon(5e-3));

  // Second-order truncation: 4× per doubling.
  CHECK(g64.max_abs_h() < 1e-2);
  CHECK(g32.max_abs_h() / g64.max_abs_h() == doctest::Approx(4.0).epsilon(0.3));
  CHECK(g64.max_defect() < 5e-3);
  CHECK(closedness_residual(g64) < 1e-4);
  CHECK(g32.symmetry_residual() / g64.symmetry_residual() == doctest::Approx(4.0).epsilon(0.3));
  CHECK(tangential_part_of_h(c64, g64) < 1e-10);
  CHECK(g64.normality_residual() < 1e-10);

  const Immersion tuned = minimal_clifford(32);
  const AnglePotential ap = angle_potential(tuned);
  CHECK(ap.holonomy.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(ap.exact);
  CHECK(ap.theta.cwiseAbs().maxCoeff() < 1e-3);
  CHECK(integrals(tuned).max_h < 1e-10);
}

TEST_CASE("perturbed Clifford torus: closedness and defect converge at second order") {
  const GeometryCache g32 = geometry(perturbed_clifford(32));
  const GeometryCache g64 = geometry(perturbed_clifford(64));
  const double c32 = closedness_residual(g32);
  const double c64 = closedness_residual(g64);
  CAPTURE(c32);
  CAPTURE(c64);
  CHECK(c32 / c64 == doctest::Approx(4.0).epsilon(0.3));
  CHECK(g32.max_defect() / g64.max_defect() == doctest::Approx(4.0).epsilon(0.3));
  CHECK(g64.normality_residual() < 0.1 * g64.max_abs_h());
}

TEST_CASE("closedness gate of the angle potential") {
  const Immersion state = perturbed_clifford(32);
  AngleOptions strict;
  strict.tol_closed = 1e-6;
  CHECK_THROWS_AS(angle_potential(state, strict), NotClosed);
  AngleOptions loose;
  loose.tol_closed = 1.0;
  CHECK_NOTHROW(angle_potential(state, loose));
}

TEST_CASE("curves have no closedness residual") {
  CHECK(closedness_residual(flat_circle(flat(), 64, 0.2)) == 0.0);
  CHECK(closedness_residual(great_circle(64)) == 0.0);
}

TEST_CASE("snapshot csv columns") {
  std::ostringstream curve_out;
  const Immersion curve = graph_curve(flat(), 32, 0.01, 1);
  write_snapshot_csv(curve_out, curve, geometry(curve));
  std::istringstream curve_in(curve_out.str());
  std::string line;
  std::getline(curve_in, line);
  CHECK(line == "u0,u1,x0,x1,abs_h,abs_a,defect");
  int rows = 0;
  while (std::getline(curve_in, line)) ++rows;
  CHECK(rows == 32);

  std::ostringstream torus_out;
  const Immersion torus = clifford_torus(cp2(), 16);
  write_snapshot_csv(torus_out, torus, geometry(torus));
  std::istringstream torus_in(torus_out.str());
  std::getline(torus_in, line);
  CHECK(line == "u0,u1,x0,x1,x2,x3,abs_h,abs_a,defect");
}

TEST_CASE("immersion rejects inconsistent wraps") {
  const Immersion line = straight_line(flat(), 32);
  std::vector<AmbVec> bad{AmbVec::Constant(2, 0.3)};
  CHECK_THROWS_AS(Immersion(line.space_ptr(), line.topology(), line.coords(), bad), InvalidImmersion);
}
