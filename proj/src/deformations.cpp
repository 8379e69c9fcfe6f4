#include "lmcf/deformations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lmcf/errors.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/laplacian.hpp"

namespace lmcf {

namespace {

Eigen::VectorXd centered(const GeometryCache& geo, const Eigen::VectorXd& f) {
  return f.array() - weighted_mean(geo, f);
}

// Central differences ∂_a f of a grid-parameter function (no deck offsets).
Eigen::Vector2d parameter_gradient(const GridTopology& top, const Eigen::VectorXd& f, int p) {
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  for (int a = 0; a < top.dim(); ++a) {
    const int plus = a == 0 ? top.shift(p, 1, 0).node : top.shift(p, 0, 1).node;
    const int minus = a == 0 ? top.shift(p, -1, 0).node : top.shift(p, 0, -1).node;
    d[a] = (f[plus] - f[minus]) / (2.0 * top.spacing(a));
  }
  return d;
}

void require_minimal(const GeometryCache& geo, const char* what) {
  const double h = geo.max_abs_h();
  if (h >= kMinimalTolerance) {
    std::ostringstream msg;
    msg << what << ": base is not minimal (max|H| = " << h << ")";
    throw NotMinimal(msg.str());
  }
}

double volume(const Immersion& imm) { return integrals(geometry(imm)).volume; }

double capture(const GeometryCache& geo, const Spectrum& spec, const Eigen::VectorXd& fc, double norm2,
               std::vector<double>& coeffs) {
  coeffs.assign(static_cast<std::size_t>(spec.size()), 0.0);
  double s = 0.0;
  for (int i = 0; i < spec.size(); ++i) {
    const double a = weighted_dot(geo, fc, spec.eigenfunctions.col(i));
    coeffs[static_cast<std::size_t>(i)] = a;
    s += a * a;
  }
  return norm2 > 0.0 ? s / norm2 : 1.0;
}

}  // namespace

Eigen::VectorXd sample_potential(const GridTopology& top, const std::function<double(double, double)>& fn) {
  Eigen::VectorXd f(top.node_count());
  for (int p = 0; p < top.node_count(); ++p) f[p] = fn(top.param(p, 0), top.dim() == 2 ? top.param(p, 1) : 0.0);
  return f;
}

Eigen::VectorXd named_potential(const GridTopology& top, const std::string& name, double amplitude, int k0, int k1) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (name == "zero") return Eigen::VectorXd::Zero(top.node_count());
  if (name == "cos")
    return sample_potential(top, [&](double u0, double u1) { return amplitude * std::cos(two_pi * (k0 * u0 + k1 * u1)); });
  if (name == "sin")
    return sample_potential(top, [&](double u0, double u1) { return amplitude * std::sin(two_pi * (k0 * u0 + k1 * u1)); });
  throw std::invalid_argument("unknown potential '" + name + "' (expected cos, sin or zero)");
}

namespace {

// X = J(g^{ij} w_j e_i) for a covector field w given per node.
template <typename Covector>
Eigen::MatrixXd dual_rotated_field(const GeometryCache& geo, const Immersion& imm, Covector w) {
  const int n = geo.dim;
  const GridTopology& top = geo.topology;
  Eigen::MatrixXd x(imm.space().real_dim(), top.node_count());
  for (int p = 0; p < top.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    const Eigen::Vector2d df = w(p);
    AmbVec grad = AmbVec::Zero(x.rows());
    for (int i = 0; i < n; ++i) {
      double gi = 0.0;
      for (int j = 0; j < n; ++j) gi += ng.g_inv(i, j) * df[j];
      grad += gi * ng.frame[i];
    }
    x.col(p) = imm.space().complex_structure(imm.point(p)) * grad;
  }
  return x;
}

template <typename Field>
Immersion integrate_rk2(const Immersion& base, double s, int substeps, Field field) {
  const double h = s / substeps;
  Immersion cur = base;
  for (int k = 0; k < substeps; ++k) {
    const Eigen::MatrixXd x1 = field(cur);
    const Immersion mid = cur.with_coords(cur.coords() + 0.5 * h * x1, cur.time());
    const Eigen::MatrixXd x2 = field(mid);
    cur = cur.with_coords(cur.coords() + h * x2, cur.time());
  }
  return cur;
}

}  // namespace

Eigen::MatrixXd hamiltonian_field(const GeometryCache& geo, const Immersion& imm, const Eigen::VectorXd& f) {
  return dual_rotated_field(geo, imm, [&](int p) { return parameter_gradient(geo.topology, f, p); });
}

Immersion flux_shift(const Immersion& base, const Eigen::Vector2d& c, int substeps) {
  if (substeps < 1) throw std::invalid_argument("flux_shift: substeps must be positive");
  if (c.cwiseAbs().maxCoeff() == 0.0) return base;
  return integrate_rk2(base, 1.0, substeps, [&](const Immersion& cur) {
    return dual_rotated_field(geometry(cur), cur, [&](int) { return c; });
  });
}

Immersion deform(const Immersion& base, const Eigen::VectorXd& f, double s, int substeps) {
  if (substeps < 1) throw std::invalid_argument("deform: substeps must be positive");
  if (f.size() != base.node_count()) throw std::invalid_argument("deform: potential size does not match the grid");
  if (s == 0.0 || f.cwiseAbs().maxCoeff() == 0.0) return base;
  const Eigen::VectorXd fc = centered(geometry(base), f);
  return integrate_rk2(base, s, substeps,
                       [&](const Immersion& cur) { return hamiltonian_field(geometry(cur), cur, fc); });
}

double hamiltonian_residual(const Immersion& base, const Eigen::VectorXd& f) {
  const GeometryCache geo = geometry(base);
  const int n = geo.dim;
  const Eigen::MatrixXd x = hamiltonian_field(geo, base, f);
  double worst = 0.0;
  double scale = 0.0;
  for (int p = 0; p < base.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    const MetricJet jet = base.space().metric_jet(base.point(p), JetOrder::Connection);
    const AmbVec jx = jet.J * x.col(p);
    const Eigen::Vector2d df = parameter_gradient(geo.topology, f, p);
    Eigen::Vector2d r = Eigen::Vector2d::Zero();
    for (int k = 0; k < n; ++k) r[k] = jet.inner(jx, ng.frame[k]) + df[k];
    double rn = 0.0;
    double dn = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        rn += ng.g_inv(i, j) * r[i] * r[j];
        dn += ng.g_inv(i, j) * df[i] * df[j];
      }
    worst = std::max(worst, std::sqrt(std::max(rn, 0.0)));
    scale = std::max(scale, std::sqrt(std::max(dn, 0.0)));
  }
  return scale > 0.0 ? worst / scale : worst;
}

AngleVariation angle_variation_residual(const Immersion& base, const Eigen::VectorXd& f, double ds,
                                        const AngleOptions& opts) {
  if (!(ds > 0.0)) throw std::invalid_argument("angle_variation_residual: ds must be positive");
  const GeometryCache geo = geometry(base);
  require_minimal(geo, "angle_variation_residual");
  const Eigen::VectorXd fc = centered(geo, f);
  AngleVariation out;
  if (fc.cwiseAbs().maxCoeff() == 0.0) return out;
  const AnglePotential plus = angle_potential(deform(base, fc, ds), opts);
  const AnglePotential minus = angle_potential(deform(base, fc, -ds), opts);
  const Eigen::VectorXd lap = DiscreteLaplacian(geo).apply(fc);
  const double c = base.space().scalar_curvature() / (2.0 * base.dim());
  Eigen::VectorXd r = (plus.theta - minus.theta) / (2.0 * ds) + lap + c * fc;
  r.array() -= 0.5 * (r.maxCoeff() + r.minCoeff());
  out.residual = r.cwiseAbs().maxCoeff();
  out.scale = lap.cwiseAbs().maxCoeff();
  return out;
}

SecondVariation second_variation(const Immersion& base, const Eigen::VectorXd& f, double ds) {
  if (!(ds > 0.0)) throw std::invalid_argument("second_variation: ds must be positive");
  const GeometryCache geo = geometry(base);
  require_minimal(geo, "second_variation");
  const Eigen::VectorXd fc = centered(geo, f);
  SecondVariation out;
  const double norm2 = weighted_dot(geo, fc, fc);
  out.norm = std::sqrt(norm2);

  const double v0 = integrals(geo).volume;
  out.fd_value = (volume(deform(base, fc, ds)) - 2.0 * v0 + volume(deform(base, fc, -ds))) / (ds * ds);
  out.fd_value_coarse =
      (volume(deform(base, fc, 2.0 * ds)) - 2.0 * v0 + volume(deform(base, fc, -2.0 * ds))) / (4.0 * ds * ds);
  out.richardson = (4.0 * out.fd_value - out.fd_value_coarse) / 3.0;

  const int k = std::min(12, base.node_count() - 2);
  std::vector<double> coeffs;
  out.spectrum = lowest_eigenpairs(geo, k);
  out.captured_fraction = capture(geo, out.spectrum, fc, norm2, coeffs);
  if (out.captured_fraction < 0.999) {
    const DiscreteLaplacian lap(geo);
    const double rq = fc.dot(lap.stiffness() * fc) / fc.dot(lap.mass().cwiseProduct(fc));
    // Shift slightly off the Rayleigh quotient so an exact eigenvalue does not
    // make the shifted operator singular.
    Spectrum near = eigenpairs_near(geo, rq * (1.0 - 1e-3), k);
    std::vector<double> near_coeffs;
    const double near_capture = capture(geo, near, fc, norm2, near_coeffs);
    if (near_capture > out.captured_fraction) {
      out.spectrum = std::move(near);
      out.captured_fraction = near_capture;
      coeffs = std::move(near_coeffs);
    }
  }
  if (out.captured_fraction < 0.999) {
    std::ostringstream msg;
    msg << "second_variation: computed modes capture only " << out.captured_fraction << " of the potential";
    throw SpectrumTruncation(msg.str());
  }
  const double c = base.space().scalar_curvature() / (2.0 * base.dim());
  for (int i = 0; i < out.spectrum.size(); ++i) {
    const double lambda = out.spectrum.eigenvalues[static_cast<std::size_t>(i)];
    out.spectral_value += coeffs[static_cast<std::size_t>(i)] * coeffs[static_cast<std::size_t>(i)] * lambda * (lambda - c);
  }
  return out;
}

ExactnessCorrection exactness_correction(const Immersion& initial, const FlowConfig& probe, int newton_steps,
                                         double fd_step) {
  if (initial.dim() != 2) throw std::invalid_argument("exactness_correction: needs a two-dimensional immersion");
  auto probe_holonomy = [&](const Eigen::Vector2d& c) -> Eigen::Vector2d {
    const FlowTrace trace = run(flux_shift(initial, c), probe);
    if (trace.status == FlowStatus::Failed)
      throw NoConvergence("exactness_correction: probe flow failed: " + trace.error_message);
    const Eigen::VectorXd h = angle_potential(*trace.final_state, probe.angle).holonomy;
    return {h[0], h[1]};
  };
  ExactnessCorrection out;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  Eigen::Vector2d h = probe_holonomy(c);
  out.initial_holonomy = h;
  for (int it = 0; it < newton_steps; ++it) {
    Eigen::Matrix2d jac;
    for (int a = 0; a < 2; ++a) {
      Eigen::Vector2d cp = c;
      cp[a] += fd_step;
      jac.col(a) = (probe_holonomy(cp) - h) / fd_step;
    }
    c -= jac.fullPivLu().solve(h);
    h = probe_holonomy(c);
  }
  out.flux = c;
  out.final_holonomy = h;
  return out;
}

}  // namespace lmcf
