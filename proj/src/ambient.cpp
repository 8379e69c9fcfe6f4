#include "lmcf/ambient.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "lmcf/errors.hpp"

namespace lmcf {

namespace {

using cplx = std::complex<double>;

constexpr double kSphereChartRadius = 3.0;
constexpr double kFubiniStudyChartRadius = 2.5;
constexpr double kCylinderChartHalfWidth = 2.0;

AmbMat standard_j(int real_dim) {
  AmbMat j = AmbMat::Zero(real_dim, real_dim);
  for (int k = 0; k < real_dim / 2; ++k) {
    j(2 * k + 1, 2 * k) = 1.0;
    j(2 * k, 2 * k + 1) = -1.0;
  }
  return j;
}

// Complex components (w1, w2) of a real vector (x1, y1, x2, y2).
std::array<cplx, 2> to_complex(const AmbVec& v) {
  return {cplx(v[0], v[1]), cplx(v[2], v[3])};
}

void init_jet(MetricJet& jet, const AmbVec& x, int dim) {
  jet.point = x;
  jet.dim = dim;
  for (int a = 0; a < 4; ++a) jet.gamma[a] = AmbMat::Zero(dim, dim);
}

void constant_curvature_riemann(MetricJet& jet, double curvature) {
  const int d = jet.dim;
  jet.riemann_data.assign(static_cast<std::size_t>(d * d * d * d), 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          jet.riemann(a, b, c, e) =
              curvature * (jet.g(a, c) * jet.g(b, e) - jet.g(a, e) * jet.g(b, c));
}

}  // namespace

std::string to_string(AmbientKind kind) {
  switch (kind) {
    case AmbientKind::FlatTorus: return "flat_torus";
    case AmbientKind::RoundSphere: return "round_sphere";
    case AmbientKind::FubiniStudyCP2: return "fubini_study_cp2";
    case AmbientKind::HyperbolicCylinder: return "hyperbolic_cylinder";
  }
  return "unknown";
}

AmbVec MetricJet::christoffel(const AmbVec& u, const AmbVec& v) const {
  AmbVec out(dim);
  for (int a = 0; a < dim; ++a) out[a] = u.dot(gamma[a] * v);
  return out;
}

double MetricJet::riemann(const AmbVec& u, const AmbVec& v, const AmbVec& w,
                          const AmbVec& z) const {
  double sum = 0.0;
  for (int a = 0; a < dim; ++a) {
    if (u[a] == 0.0) continue;
    for (int b = 0; b < dim; ++b) {
      if (v[b] == 0.0) continue;
      for (int c = 0; c < dim; ++c) {
        if (w[c] == 0.0) continue;
        for (int e = 0; e < dim; ++e) sum += u[a] * v[b] * w[c] * z[e] * riemann(a, b, c, e);
      }
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Catalog

AmbientSpace AmbientSpace::flat_torus(int complex_dim, std::vector<double> periods) {
  if (complex_dim < 1 || complex_dim > 2) throw InvalidImmersion("flat torus: complex_dim must be 1 or 2");
  AmbientSpace s;
  s.kind_ = AmbientKind::FlatTorus;
  s.complex_dim_ = complex_dim;
  if (periods.empty()) periods.assign(static_cast<std::size_t>(2 * complex_dim), 1.0);
  if (static_cast<int>(periods.size()) != 2 * complex_dim)
    throw InvalidImmersion("flat torus: need one period per real coordinate");
  s.periods_ = std::move(periods);
  s.parameter_ = s.periods_[0];
  s.scalar_curvature_ = 0.0;
  s.curvature_bounds_ = {0, 0, 0, 0, 0, 0};
  s.injectivity_radius_lb_ = 0.5 * *std::min_element(s.periods_.begin(), s.periods_.end());
  return s;
}

AmbientSpace AmbientSpace::round_sphere(double radius) {
  if (!(radius > 0.0)) throw InvalidImmersion("round sphere: radius must be positive");
  AmbientSpace s;
  s.kind_ = AmbientKind::RoundSphere;
  s.complex_dim_ = 1;
  s.parameter_ = radius;
  const double k = 1.0 / (radius * radius);
  s.scalar_curvature_ = 2.0 * k;
  // |Rm| = 2|K| for a surface; all covariant derivatives vanish.
  s.curvature_bounds_ = {2.0 * k, 0, 0, 0, 0, 0};
  s.injectivity_radius_lb_ = std::numbers::pi * radius;
  return s;
}

AmbientSpace AmbientSpace::fubini_study_cp2(double holomorphic_curvature) {
  if (!(holomorphic_curvature > 0.0)) throw InvalidImmersion("Fubini-Study: curvature must be positive");
  AmbientSpace s;
  s.kind_ = AmbientKind::FubiniStudyCP2;
  s.complex_dim_ = 2;
  s.parameter_ = holomorphic_curvature;
  // Ric = (n+1) c/2 g with n = 2, so R̄ = 2n (n+1) c / 2 = 6c.
  s.scalar_curvature_ = 6.0 * holomorphic_curvature;
  s.injectivity_radius_lb_ = std::numbers::pi / std::sqrt(holomorphic_curvature);
  // K₀ by sampling; the space is symmetric so K₁..K₅ vanish.
  double k0 = 0.0;
  for (const AmbVec& x : sample_safe_points(s, 16, 7u)) {
    const MetricJet jet = s.metric_jet(x, JetOrder::Curvature);
    double norm2 = 0.0;
    const int d = 4;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            double raised = 0.0;
            for (int p = 0; p < d; ++p)
              for (int q = 0; q < d; ++q)
                for (int r = 0; r < d; ++r)
                  for (int t = 0; t < d; ++t)
                    raised += jet.g_inv(a, p) * jet.g_inv(b, q) * jet.g_inv(c, r) *
                              jet.g_inv(e, t) * jet.riemann(p, q, r, t);
            norm2 += raised * jet.riemann(a, b, c, e);
          }
    k0 = std::max(k0, std::sqrt(std::max(norm2, 0.0)));
  }
  s.curvature_bounds_ = {k0, 0, 0, 0, 0, 0};
  return s;
}

AmbientSpace AmbientSpace::hyperbolic_cylinder(double core_length) {
  if (!(core_length > 0.0)) throw InvalidImmersion("hyperbolic cylinder: core length must be positive");
  AmbientSpace s;
  s.kind_ = AmbientKind::HyperbolicCylinder;
  s.complex_dim_ = 1;
  s.parameter_ = core_length;
  s.scalar_curvature_ = -2.0;
  s.curvature_bounds_ = {2.0, 0, 0, 0, 0, 0};
  // Metadata only: completeness of the quotient is not verified numerically.
  s.injectivity_radius_lb_ = 0.5 * core_length;
  return s;
}

std::string AmbientSpace::name() const {
  std::string out = to_string(kind_);
  if (uses_finite_differences()) out += "[fd]";
  return out;
}

AmbientSpace AmbientSpace::with_finite_differences(double step) const {
  AmbientSpace copy = *this;
  copy.fd_step_ = step;
  return copy;
}

double AmbientSpace::safe_margin(const AmbVec& x) const {
  switch (kind_) {
    case AmbientKind::FlatTorus: return std::numeric_limits<double>::infinity();
    case AmbientKind::RoundSphere: return kSphereChartRadius - x.norm();
    case AmbientKind::FubiniStudyCP2: return kFubiniStudyChartRadius - x.norm();
    case AmbientKind::HyperbolicCylinder: return kCylinderChartHalfWidth - std::abs(x[0]);
  }
  return -1.0;
}

bool AmbientSpace::in_safe_region(const AmbVec& x) const {
  if (x.size() != real_dim()) return false;
  if (!x.allFinite()) return false;
  return safe_margin(x) > 0.0;
}

bool AmbientSpace::is_deck_translation(const AmbVec& v, double tol) const {
  if (v.size() != real_dim()) return false;
  auto near_multiple = [tol](double value, double period) {
    const double k = std::round(value / period);
    return std::abs(value - k * period) <= tol * std::max(1.0, std::abs(value));
  };
  switch (kind_) {
    case AmbientKind::FlatTorus:
      for (int a = 0; a < real_dim(); ++a)
        if (!near_multiple(v[a], periods_[static_cast<std::size_t>(a)])) return false;
      return true;
    case AmbientKind::HyperbolicCylinder:
      return std::abs(v[0]) <= tol && near_multiple(v[1], parameter_);
    case AmbientKind::RoundSphere:
    case AmbientKind::FubiniStudyCP2:
      return v.norm() <= tol;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Closed-form metric and complex structure

AmbMat AmbientSpace::metric(const AmbVec& x) const {
  const int d = real_dim();
  switch (kind_) {
    case AmbientKind::FlatTorus: return AmbMat::Identity(d, d);
    case AmbientKind::RoundSphere: {
      const double q = 1.0 + x.squaredNorm();
      const double lambda2 = 4.0 * parameter_ * parameter_ / (q * q);
      return lambda2 * AmbMat::Identity(2, 2);
    }
    case AmbientKind::HyperbolicCylinder: {
      AmbMat g = AmbMat::Zero(2, 2);
      const double c = std::cosh(x[0]);
      g(0, 0) = 1.0;
      g(1, 1) = c * c;
      return g;
    }
    case AmbientKind::FubiniStudyCP2: {
      const auto w = to_complex(x);
      const double q = 1.0 + std::norm(w[0]) + std::norm(w[1]);
      const double scale = 4.0 / parameter_;
      // Hermitian h_{jk̄} = ((1+|w|²) δ_jk - w̄_j w_k) / (1+|w|²)².
      cplx h[2][2];
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          h[j][k] = ((j == k ? q : 0.0) - std::conj(w[j]) * w[k]) / (q * q);
      const cplx unit[2] = {cplx(1.0, 0.0), cplx(0.0, 1.0)};
      AmbMat g(4, 4);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          // ḡ(e_a, e_b) = Re Σ h_{jk̄} ξ_j conj(η_k) with ξ, η the complex components.
          const int j = a / 2;
          const int k = b / 2;
          g(a, b) = scale * std::real(h[j][k] * unit[a % 2] * std::conj(unit[b % 2]));
        }
      return g;
    }
  }
  return AmbMat::Identity(d, d);
}

AmbMat AmbientSpace::complex_structure(const AmbVec& x) const {
  if (kind_ == AmbientKind::HyperbolicCylinder) {
    AmbMat j = AmbMat::Zero(2, 2);
    const double c = std::cosh(x[0]);
    j(1, 0) = 1.0 / c;  // J ∂ρ = cosh⁻¹ρ ∂s
    j(0, 1) = -c;       // J ∂s = -coshρ ∂ρ
    return j;
  }
  return standard_j(real_dim());
}

// ---------------------------------------------------------------------------
// Connection and curvature

void AmbientSpace::closed_form_christoffels(const AmbVec& x, MetricJet& jet) const {
  switch (kind_) {
    case AmbientKind::FlatTorus: return;
    case AmbientKind::RoundSphere: {
      // Conformal metric e^{2φ}δ: Γ^k_ij = δ_ki ∂_jφ + δ_kj ∂_iφ - δ_ij ∂_kφ.
      const double q = 1.0 + x.squaredNorm();
      const double dphi[2] = {-2.0 * x[0] / q, -2.0 * x[1] / q};
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            jet.gamma[k](i, j) = (k == i ? dphi[j] : 0.0) + (k == j ? dphi[i] : 0.0) -
                                 (i == j ? dphi[k] : 0.0);
      return;
    }
    case AmbientKind::HyperbolicCylinder: {
      const double sh = std::sinh(x[0]);
      const double ch = std::cosh(x[0]);
      jet.gamma[0](1, 1) = -sh * ch;
      jet.gamma[1](0, 1) = sh / ch;
      jet.gamma[1](1, 0) = sh / ch;
      return;
    }
    case AmbientKind::FubiniStudyCP2: {
      // Holomorphic Christoffels Γ^i_jk = -(δ_ij w̄_k + δ_ik w̄_j)/(1+|w|²);
      // for real X, Y the (1,0) part of Γ(X, Y) is -(ξ^i (w̄·η) + η^i (w̄·ξ))/(1+|w|²).
      const auto w = to_complex(x);
      const double q = 1.0 + std::norm(w[0]) + std::norm(w[1]);
      const cplx unit[2] = {cplx(1.0, 0.0), cplx(0.0, 1.0)};
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) {
          cplx xi[2] = {0.0, 0.0};
          cplx eta[2] = {0.0, 0.0};
          xi[b / 2] = unit[b % 2];
          eta[c / 2] = unit[c % 2];
          const cplx wxi = std::conj(w[0]) * xi[0] + std::conj(w[1]) * xi[1];
          const cplx weta = std::conj(w[0]) * eta[0] + std::conj(w[1]) * eta[1];
          for (int i = 0; i < 2; ++i) {
            const cplx out = -(xi[i] * weta + eta[i] * wxi) / q;
            jet.gamma[2 * i](b, c) = out.real();
            jet.gamma[2 * i + 1](b, c) = out.imag();
          }
        }
      return;
    }
  }
}

void AmbientSpace::closed_form_riemann(MetricJet& jet) const {
  const int d = jet.dim;
  switch (kind_) {
    case AmbientKind::FlatTorus:
      jet.riemann_data.assign(static_cast<std::size_t>(d * d * d * d), 0.0);
      return;
    case AmbientKind::RoundSphere:
      constant_curvature_riemann(jet, 1.0 / (parameter_ * parameter_));
      return;
    case AmbientKind::HyperbolicCylinder:
      constant_curvature_riemann(jet, -1.0);
      return;
    case AmbientKind::FubiniStudyCP2: {
      jet.riemann_data.assign(static_cast<std::size_t>(d * d * d * d), 0.0);
      const AmbMat& g = jet.g;
      const AmbMat gj = g * jet.J;  // gj(a, c) = ḡ(e_a, J e_c)
      const double k = parameter_ / 4.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          for (int c = 0; c < d; ++c)
            for (int e = 0; e < d; ++e)
              jet.riemann(a, b, c, e) =
                  k * (g(a, c) * g(b, e) - g(a, e) * g(b, c) + gj(a, c) * gj(b, e) -
                       gj(a, e) * gj(b, c) + 2.0 * gj(a, b) * gj(c, e));
      return;
    }
  }
}

void AmbientSpace::fd_christoffels(const AmbVec& x, MetricJet& jet) const {
  const int d = real_dim();
  const double h = fd_step_;
  std::array<AmbMat, 4> dg;
  for (int c = 0; c < d; ++c) {
    AmbVec step = AmbVec::Zero(d);
    step[c] = h;
    dg[c] = (-metric(x + 2.0 * step) + 8.0 * metric(x + step) - 8.0 * metric(x - step) +
             metric(x - 2.0 * step)) /
            (12.0 * h);
  }
  const AmbMat g_inv = metric(x).inverse();
  for (int a = 0; a < d; ++a) {
    jet.gamma[a] = AmbMat::Zero(d, d);
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double sum = 0.0;
        for (int e = 0; e < d; ++e)
          sum += g_inv(a, e) * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
        jet.gamma[a](b, c) = 0.5 * sum;
      }
  }
}

void AmbientSpace::fd_riemann(const AmbVec& x, MetricJet& jet) const {
  const int d = real_dim();
  const double h = fd_step_;
  // ∂_C Γ^A_{DB} by central differences of the finite-difference Christoffels.
  std::array<std::array<AmbMat, 4>, 4> dgamma;  // dgamma[c][a](d, b)
  for (int c = 0; c < d; ++c) {
    AmbVec step = AmbVec::Zero(d);
    step[c] = h;
    MetricJet plus;
    MetricJet minus;
    init_jet(plus, x + step, d);
    init_jet(minus, x - step, d);
    fd_christoffels(x + step, plus);
    fd_christoffels(x - step, minus);
    for (int a = 0; a < d; ++a) dgamma[c][a] = (plus.gamma[a] - minus.gamma[a]) / (2.0 * h);
  }
  // R^A_{BCD} = ∂_C Γ^A_{DB} - ∂_D Γ^A_{CB} + Γ^A_{CE} Γ^E_{DB} - Γ^A_{DE} Γ^E_{CB}.
  std::vector<double> up(static_cast<std::size_t>(d * d * d * d), 0.0);
  auto at = [d](int a, int b, int c, int e) { return ((a * d + b) * d + c) * d + e; };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double sum = dgamma[c][a](e, b) - dgamma[e][a](c, b);
          for (int f = 0; f < d; ++f)
            sum += jet.gamma[a](c, f) * jet.gamma[f](e, b) - jet.gamma[a](e, f) * jet.gamma[f](c, b);
          up[static_cast<std::size_t>(at(a, b, c, e))] = sum;
        }
  // R_ABCD = g_CE R^E_{DAB}.
  jet.riemann_data.assign(up.size(), 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double sum = 0.0;
          for (int f = 0; f < d; ++f) sum += jet.g(c, f) * up[static_cast<std::size_t>(at(f, e, a, b))];
          jet.riemann(a, b, c, e) = sum;
        }
}

MetricJet AmbientSpace::metric_jet(const AmbVec& x, JetOrder order) const {
  if (!in_safe_region(x)) throw ChartExit("point outside the safe region of chart " + name());
  MetricJet jet;
  const int d = real_dim();
  init_jet(jet, x, d);
  jet.g = metric(x);
  jet.g_inv = jet.g.inverse();
  jet.J = complex_structure(x);
  if (uses_finite_differences()) {
    fd_christoffels(x, jet);
    if (order == JetOrder::Curvature) fd_riemann(x, jet);
  } else {
    closed_form_christoffels(x, jet);
    if (order == JetOrder::Curvature) closed_form_riemann(jet);
  }
  return jet;
}

MetricJet metric_jet(const AmbientSpace& space, const AmbVec& x, JetOrder order) {
  return space.metric_jet(x, order);
}

double scalar_curvature(const AmbientSpace& space) { return space.scalar_curvature(); }

// ---------------------------------------------------------------------------
// Self-check

AmbMat ricci(const MetricJet& jet) {
  const int d = jet.dim;
  AmbMat ric = AmbMat::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c) {
      double sum = 0.0;
      for (int b = 0; b < d; ++b)
        for (int e = 0; e < d; ++e) sum += jet.g_inv(b, e) * jet.riemann(a, b, c, e);
      ric(a, c) = sum;
    }
  return ric;
}

double KahlerEinsteinReport::worst() const {
  return std::max({einstein, kahler_ricci, parallel_j, bianchi, symmetry, scalar});
}

namespace {

// Unitary frame {u_k, J u_k}, orthonormal for ḡ.
std::vector<AmbVec> unitary_frame(const MetricJet& jet) {
  const int d = jet.dim;
  std::vector<AmbVec> basis;  // u_1, J u_1, u_2, J u_2, ...
  std::vector<AmbVec> units;
  for (int a = 0; a < d && static_cast<int>(units.size()) < d / 2; ++a) {
    AmbVec v = AmbVec::Zero(d);
    v[a] = 1.0;
    for (const AmbVec& b : basis) v -= jet.inner(v, b) * b;
    const double norm = std::sqrt(jet.inner(v, v));
    if (norm < 1e-8) continue;
    v /= norm;
    AmbVec jv = jet.J * v;
    units.push_back(v);
    basis.push_back(v);
    basis.push_back(jv);
  }
  return units;
}

}  // namespace

KahlerEinsteinReport kahler_einstein_selfcheck(const AmbientSpace& space,
                                               const std::vector<AmbVec>& points, double tol) {
  KahlerEinsteinReport rep;
  const int d = space.real_dim();
  const double einstein_const = space.scalar_curvature() / d;
  const double h = 1e-3;
  for (const AmbVec& x : points) {
    const MetricJet jet = space.metric_jet(x, JetOrder::Curvature);
    const AmbMat ric = ricci(jet);
    rep.einstein = std::max(rep.einstein, (ric - einstein_const * jet.g).cwiseAbs().maxCoeff());
    rep.scalar = std::max(rep.scalar, std::abs((jet.g_inv * ric).trace() - space.scalar_curvature()));

    const std::vector<AmbVec> units = unitary_frame(jet);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        AmbVec ea = AmbVec::Zero(d);
        AmbVec eb = AmbVec::Zero(d);
        ea[a] = 1.0;
        eb[b] = 1.0;
        const AmbVec jeb = jet.J * eb;
        double sum = 0.0;
        for (const AmbVec& u : units) sum += jet.riemann(ea, jeb, u, jet.J * u);
        rep.kahler_ricci = std::max(rep.kahler_ricci, std::abs(ric(a, b) - sum));
      }

    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            const double r = jet.riemann(a, b, c, e);
            rep.bianchi = std::max(
                rep.bianchi, std::abs(r + jet.riemann(a, c, e, b) + jet.riemann(a, e, b, c)));
            rep.symmetry = std::max({rep.symmetry, std::abs(r + jet.riemann(b, a, c, e)),
                                     std::abs(r - jet.riemann(c, e, a, b))});
          }

    // (∇̄_C J)^A_B = ∂_C J^A_B + Γ^A_{CD} J^D_B - J^A_D Γ^D_{CB}
    for (int c = 0; c < d; ++c) {
      AmbVec step = AmbVec::Zero(d);
      step[c] = h;
      const AmbMat dj = (-space.complex_structure(x + 2.0 * step) +
                         8.0 * space.complex_structure(x + step) -
                         8.0 * space.complex_structure(x - step) +
                         space.complex_structure(x - 2.0 * step)) /
                        (12.0 * h);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double v = dj(a, b);
          for (int e = 0; e < d; ++e)
            v += jet.gamma[a](c, e) * jet.J(e, b) - jet.J(a, e) * jet.gamma[e](c, b);
          rep.parallel_j = std::max(rep.parallel_j, std::abs(v));
        }
    }
  }
  rep.pass = rep.worst() < tol;
  return rep;
}

std::vector<AmbVec> sample_safe_points(const AmbientSpace& space, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int d = space.real_dim();
  std::vector<AmbVec> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    AmbVec x(d);
    switch (space.kind()) {
      case AmbientKind::FlatTorus:
        for (int a = 0; a < d; ++a) x[a] = 0.5 * (unit(rng) + 1.0) * space.lattice_periods()[static_cast<std::size_t>(a)];
        break;
      case AmbientKind::RoundSphere:
        for (int a = 0; a < d; ++a) x[a] = 2.5 * unit(rng);
        if (x.norm() >= 2.5) continue;
        break;
      case AmbientKind::FubiniStudyCP2:
        for (int a = 0; a < d; ++a) x[a] = 2.0 * unit(rng);
        if (x.norm() >= 2.0) continue;
        break;
      case AmbientKind::HyperbolicCylinder:
        x[0] = 1.8 * unit(rng);
        x[1] = 0.5 * (unit(rng) + 1.0) * space.parameter();
        break;
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace lmcf
