#include "lmcf/families.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "lmcf/errors.hpp"
#include "lmcf/geometry.hpp"

namespace lmcf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_kind(const SpacePtr& space, AmbientKind kind, const char* what) {
  if (!space || space->kind() != kind)
    throw InvalidImmersion(std::string(what) + " requires a " + to_string(kind) + " ambient");
}

// Secant iteration on a scalar function near x0.
double secant_root(const std::function<double(double)>& fn, double x0, double x1) {
  double f0 = fn(x0);
  double f1 = fn(x1);
  for (int it = 0; it < 60 && std::abs(x1 - x0) > 1e-15; ++it) {
    if (f1 == f0) break;
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = fn(x1);
    if (std::abs(f1) < 1e-15) break;
  }
  return x1;
}

// Mean of the chart-radial component of the mean curvature vector.
double mean_radial_curvature(const Immersion& imm) {
  const GeometryCache geo = geometry(imm);
  double s = 0.0;
  for (int p = 0; p < imm.node_count(); ++p) {
    const AmbVec x = imm.point(p);
    s += geo.nodes[static_cast<std::size_t>(p)].mean_curvature_vector.dot(x) / x.norm();
  }
  return s / imm.node_count();
}

}  // namespace

Immersion straight_line(SpacePtr flat, int resolution) { return graph_curve(std::move(flat), resolution, 0.0, 1); }

Immersion graph_curve(SpacePtr flat, int resolution, double amplitude, int mode) {
  require_kind(flat, AmbientKind::FlatTorus, "graph curve");
  if (flat->complex_dim() != 1) throw InvalidImmersion("graph curve: ambient must be a flat 2-torus");
  GridTopology top({resolution});
  const double period = flat->lattice_periods()[0];
  Eigen::MatrixXd coords(2, top.node_count());
  for (int p = 0; p < top.node_count(); ++p) {
    const double u = top.param(p, 0);
    coords(0, p) = u * period;
    coords(1, p) = amplitude * std::sin(kTwoPi * mode * u);
  }
  AmbVec wrap(2);
  wrap << period, 0.0;
  return Immersion(flat, top, std::move(coords), {wrap});
}

Immersion flat_circle(SpacePtr flat, int resolution, double radius, double cx, double cy) {
  require_kind(flat, AmbientKind::FlatTorus, "flat circle");
  GridTopology top({resolution});
  Eigen::MatrixXd coords(2, top.node_count());
  for (int p = 0; p < top.node_count(); ++p) {
    const double phi = kTwoPi * top.param(p, 0);
    coords(0, p) = cx + radius * std::cos(phi);
    coords(1, p) = cy + radius * std::sin(phi);
  }
  return Immersion(flat, top, std::move(coords));
}

Immersion flat_identity_torus(SpacePtr flat2, int resolution) {
  require_kind(flat2, AmbientKind::FlatTorus, "flat identity torus");
  if (flat2->complex_dim() != 2) throw InvalidImmersion("flat identity torus: ambient must be flat C^2");
  GridTopology top({resolution, resolution});
  const auto& per = flat2->lattice_periods();
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(4, top.node_count());
  for (int p = 0; p < top.node_count(); ++p) {
    coords(0, p) = top.param(p, 0) * per[0];
    coords(2, p) = top.param(p, 1) * per[2];
  }
  AmbVec w0 = AmbVec::Zero(4);
  AmbVec w1 = AmbVec::Zero(4);
  w0[0] = per[0];
  w1[2] = per[2];
  return Immersion(flat2, top, std::move(coords), {w0, w1});
}

Immersion sphere_circle(SpacePtr sphere, int resolution, double chart_radius) {
  require_kind(sphere, AmbientKind::RoundSphere, "sphere circle");
  GridTopology top({resolution});
  Eigen::MatrixXd coords(2, top.node_count());
  for (int p = 0; p < top.node_count(); ++p) {
    const double phi = kTwoPi * top.param(p, 0);
    coords(0, p) = chart_radius * std::cos(phi);
    coords(1, p) = chart_radius * std::sin(phi);
  }
  return Immersion(sphere, top, std::move(coords));
}

double discrete_equator_radius(SpacePtr sphere, int resolution) {
  auto fn = [&](double r) { return mean_radial_curvature(sphere_circle(sphere, resolution, r)); };
  return secant_root(fn, 1.0, 1.0 + 1e-3);
}

Immersion tilted_great_circle(SpacePtr sphere, int resolution, double tilt) {
  const double r_star = discrete_equator_radius(sphere, resolution);
  const Immersion base = sphere_circle(sphere, resolution, r_star);
  // Inverse stereographic projection onto the unit sphere, rotation about the
  // x-axis, projection back. The discrete correction r* is carried along by
  // scaling the projected point's chart radius.
  Eigen::MatrixXd coords = base.coords();
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  for (int p = 0; p < base.node_count(); ++p) {
    const double x = coords(0, p) / r_star;
    const double y = coords(1, p) / r_star;
    const double q = 1.0 + x * x + y * y;
    const double X = 2.0 * x / q;
    const double Y = 2.0 * y / q;
    const double Z = (x * x + y * y - 1.0) / q;
    const double Y2 = c * Y - s * Z;
    const double Z2 = s * Y + c * Z;
    coords(0, p) = r_star * X / (1.0 - Z2);
    coords(1, p) = r_star * Y2 / (1.0 - Z2);
  }
  return base.with_coords(std::move(coords), 0.0);
}

Immersion perturbed_great_circle(SpacePtr sphere, int resolution, double amplitude, int mode) {
  if (mode < 1) throw InvalidImmersion("perturbed great circle: mode must be at least 1");
  if (mode == 1) return tilted_great_circle(std::move(sphere), resolution, amplitude);
  GridTopology top({resolution});
  auto build = [&](double base) {
    Eigen::MatrixXd coords(2, top.node_count());
    for (int p = 0; p < top.node_count(); ++p) {
      const double phi = kTwoPi * top.param(p, 0);
      const double r = base * (1.0 + amplitude * std::cos(mode * phi));
      coords(0, p) = r * std::cos(phi);
      coords(1, p) = r * std::sin(phi);
    }
    return Immersion(sphere, top, std::move(coords));
  };
  // The perturbation changes the enclosed area at second order, which makes
  // α_H inexact and seeds the unstable latitude mode. The base radius is
  // chosen so that the discrete holonomy vanishes.
  auto holonomy = [&](double base) { return angle_potential(build(base)).holonomy[0]; };
  const double r_star = discrete_equator_radius(sphere, resolution);
  return build(secant_root(holonomy, r_star, r_star * (1.0 + 1e-4)));
}

Immersion clifford_torus(SpacePtr cp2, int resolution, double modulus) {
  require_kind(cp2, AmbientKind::FubiniStudyCP2, "Clifford torus");
  GridTopology top({resolution, resolution});
  Eigen::MatrixXd coords(4, top.node_count());
  for (int p = 0; p < top.node_count(); ++p) {
    const double a = kTwoPi * top.param(p, 0);
    const double b = kTwoPi * top.param(p, 1);
    coords(0, p) = modulus * std::cos(a);
    coords(1, p) = modulus * std::sin(a);
    coords(2, p) = modulus * std::cos(b);
    coords(3, p) = modulus * std::sin(b);
  }
  return Immersion(cp2, top, std::move(coords));
}

double discrete_clifford_modulus(SpacePtr cp2, int resolution) {
  auto fn = [&](double rho) { return mean_radial_curvature(clifford_torus(cp2, resolution, rho)); };
  return secant_root(fn, 1.0, 1.0 + 1e-3);
}

Immersion cylinder_curve(SpacePtr cylinder, int resolution, double amplitude, int mode) {
  require_kind(cylinder, AmbientKind::HyperbolicCylinder, "cylinder curve");
  GridTopology top({resolution});
  const double ell = cylinder->parameter();
  Eigen::MatrixXd coords(2, top.node_count());
  for (int p = 0; p < top.node_count(); ++p) {
    const double u = top.param(p, 0);
    coords(0, p) = amplitude * std::cos(kTwoPi * mode * u);
    coords(1, p) = ell * u;
  }
  AmbVec wrap(2);
  wrap << 0.0, ell;
  return Immersion(cylinder, top, std::move(coords), {wrap});
}

}  // namespace lmcf
