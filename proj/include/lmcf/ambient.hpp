#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lmcf {

/// Vectors and matrices in the ambient chart (real dimension 2 or 4).
using AmbVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using AmbMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

enum class AmbientKind { FlatTorus, RoundSphere, FubiniStudyCP2, HyperbolicCylinder };

std::string to_string(AmbientKind kind);

/// How much of the jet `metric_jet` evaluates.
enum class JetOrder {
  Connection,  ///< g, J, Christoffels
  Curvature,   ///< additionally the Riemann tensor
};

/// Second-order geometry of the ambient metric at one chart point.
///
/// Index conventions: `gamma[A](B, C)` is Γ^A_{BC}; `riemann(A, B, C, D)` is
/// R̄_{ABCD} = ḡ(R(e_A, e_B) e_D, e_C), so R̄_{uvuv} is the sectional curvature
/// of span{u, v} and is positive on round spheres.
struct MetricJet {
  AmbVec point;
  AmbMat g;
  AmbMat g_inv;
  AmbMat J;  // J(A, B) = J^A_B
  std::array<AmbMat, 4> gamma;
  std::vector<double> riemann_data;  // empty unless JetOrder::Curvature
  int dim = 0;

  double riemann(int a, int b, int c, int d) const {
    return riemann_data[((a * dim + b) * dim + c) * dim + d];
  }
  double& riemann(int a, int b, int c, int d) {
    return riemann_data[((a * dim + b) * dim + c) * dim + d];
  }

  double inner(const AmbVec& u, const AmbVec& v) const { return u.dot(g * v); }

  /// Γ(u, v)^A = Γ^A_{BC} u^B v^C.
  AmbVec christoffel(const AmbVec& u, const AmbVec& v) const;

  /// R̄(u, v, w, z) contracted with arbitrary vectors.
  double riemann(const AmbVec& u, const AmbVec& v, const AmbVec& w, const AmbVec& z) const;
};

/// One explicit Kähler–Einstein ambient space described in a single chart.
///
/// Instances are immutable and safe to evaluate concurrently.
class AmbientSpace {
 public:
  /// Flat C^n with a rectangular lattice; `periods` holds one period per real
  /// coordinate (x1, y1, x2, y2, ...).
  static AmbientSpace flat_torus(int complex_dim, std::vector<double> periods = {});
  /// Round 2-sphere of the given radius in the stereographic chart.
  static AmbientSpace round_sphere(double radius = 1.0);
  /// CP^2 with the Fubini–Study metric in the affine chart (w1, w2). The metric
  /// is normalized to constant holomorphic sectional curvature
  /// `holomorphic_curvature` (4 gives sectional curvatures in [1, 4], R̄ = 24).
  static AmbientSpace fubini_study_cp2(double holomorphic_curvature = 4.0);
  /// Hyperbolic cylinder (K = -1) around a closed geodesic of length
  /// `core_length`, in Fermi coordinates (ρ, s) with g = dρ² + cosh²ρ ds².
  static AmbientSpace hyperbolic_cylinder(double core_length);

  AmbientKind kind() const { return kind_; }
  std::string name() const;
  int complex_dim() const { return complex_dim_; }
  int real_dim() const { return 2 * complex_dim_; }
  double scalar_curvature() const { return scalar_curvature_; }
  /// K₀..K₅: sup-norms of R̄m and its covariant derivatives.
  const std::array<double, 6>& curvature_bounds() const { return curvature_bounds_; }
  double injectivity_radius_lb() const { return injectivity_radius_lb_; }
  /// Normalization parameter (sphere radius, FS holomorphic curvature, ℓ).
  double parameter() const { return parameter_; }
  const std::vector<double>& lattice_periods() const { return periods_; }

  /// True when `x` lies strictly inside the chart's safe region.
  bool in_safe_region(const AmbVec& x) const;
  /// Signed distance-like margin (chart units) to the safe-region boundary.
  double safe_margin(const AmbVec& x) const;
  /// True when translating by `v` is an isometry of the chart that identifies
  /// points of the same quotient (lattice vectors, multiples of ℓ along s).
  bool is_deck_translation(const AmbVec& v, double tol = 1e-9) const;

  /// Copy of this space that evaluates Christoffels and curvature from
  /// finite differences of the metric instead of the closed forms.
  AmbientSpace with_finite_differences(double step = 1e-3) const;
  bool uses_finite_differences() const { return fd_step_ > 0.0; }

  AmbMat metric(const AmbVec& x) const;
  AmbMat complex_structure(const AmbVec& x) const;

  /// Evaluates the jet at `x`; throws ChartExit outside the safe region.
  MetricJet metric_jet(const AmbVec& x, JetOrder order = JetOrder::Curvature) const;

 private:
  AmbientSpace() = default;

  void closed_form_christoffels(const AmbVec& x, MetricJet& jet) const;
  void closed_form_riemann(MetricJet& jet) const;
  void fd_christoffels(const AmbVec& x, MetricJet& jet) const;
  void fd_riemann(const AmbVec& x, MetricJet& jet) const;

  AmbientKind kind_ = AmbientKind::FlatTorus;
  int complex_dim_ = 1;
  double parameter_ = 1.0;
  double scalar_curvature_ = 0.0;
  std::array<double, 6> curvature_bounds_{};
  double injectivity_radius_lb_ = 0.0;
  std::vector<double> periods_;
  double fd_step_ = 0.0;
};

/// Free-function form of AmbientSpace::metric_jet.
MetricJet metric_jet(const AmbientSpace& space, const AmbVec& x,
                     JetOrder order = JetOrder::Curvature);

double scalar_curvature(const AmbientSpace& space);

struct KahlerEinsteinReport {
  double einstein = 0.0;       // max |Ric - (R̄/2n) g|
  double kahler_ricci = 0.0;   // max |Ric_AB - R̄(e_A, J e_B, u_k, J u_k)|
  double parallel_j = 0.0;     // max |∇̄J|
  double bianchi = 0.0;        // max first-Bianchi residual
  double symmetry = 0.0;       // max pair/antisymmetry residual of R̄m
  double scalar = 0.0;         // max |trace Ric - R̄|
  bool pass = false;

  double worst() const;
};

/// Residuals of the Kähler–Einstein identities at every sample point.
KahlerEinsteinReport kahler_einstein_selfcheck(const AmbientSpace& space,
                                               const std::vector<AmbVec>& points, double tol);

/// Ricci tensor Ric_AC = g^{BD} R̄_{ABCD} of a jet with curvature.
AmbMat ricci(const MetricJet& jet);

/// Points drawn uniformly from a box inside the safe region (deterministic in `seed`).
std::vector<AmbVec> sample_safe_points(const AmbientSpace& space, int count, unsigned seed);

}  // namespace lmcf
