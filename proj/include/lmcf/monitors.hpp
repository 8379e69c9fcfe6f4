#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lmcf/flow.hpp"
#include "lmcf/geometry.hpp"
#include "lmcf/immersion.hpp"
#include "lmcf/spectral.hpp"

namespace lmcf {

/// Relative slack allowed on every theorem inequality.
constexpr double kInequalityTolerance = 0.05;

/// Outcome of one monitor. `margin` is signed and, unless `note` says
/// otherwise, relative to the dominant side of the inequality.
struct CheckResult {
  std::string name;
  bool pass = true;
  double margin = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::string, double>> witnesses;
  std::string note;
  bool required = true;  // false for informational audits

  void witness(std::string key, double value) { witnesses.emplace_back(std::move(key), value); }
};

// ---------------------------------------------------------------------------
// Noncollapsing and class membership

struct NoncollapseOptions {
  int sample_count = 16;
  unsigned seed = 7u;
  /// Graph stencil for surfaces: 8 (axis + diagonal) or 16 (adds knight
  /// moves). Curves always use the 2-neighbour graph.
  int stencil = 16;
};

/// κ̂ = min over random centres q and radii s ∈ {r/4, r/2, r} of Vol(B(q,s))/sⁿ,
/// with graph distances from Dijkstra on metric edge lengths and each node's
/// cell counted by the fraction of it inside the ball.
double noncollapse_estimate(const GeometryCache& geo, double r, const NoncollapseOptions& opts = {});
double noncollapse_estimate(const Immersion& imm, double r, const NoncollapseOptions& opts = {});

struct ClassParams {
  double kappa = 1.0;
  double r = 0.1;
  double lambda_a = 1.0;  // Λ, bound on |A|
  double eps = 1.0;       // ε, bound on |H|
  double delta = 0.0;     // class B eigenvalue margin
  /// Throws ValidationError listing every non-positive field.
  void validate(bool class_b) const;
};

enum class ImmersionClass { A, B };

/// Membership in class A (noncollapsed, |A| ≤ Λ, |H| ≤ ε) or class B (A plus
/// λ₁ ≥ R̄/2n + δ and exact α_H). The verdict is in `pass`.
CheckResult class_membership(const Immersion& imm, const ClassParams& params, ImmersionClass cls,
                             const NoncollapseOptions& opts = {});

// ---------------------------------------------------------------------------
// Trace checks

/// Log-derivative of ∫|H|² between consecutive rows against R̄/n + 2Λε, and,
/// when `exact`, against −2(λ₁ − R̄/2n − Λε) with the latest λ₁. Intervals
/// with ∫|H|² < 1e-24 at either end are skipped.
CheckResult gronwall_check(const FlowTrace& trace, bool exact);

struct FitWindow {
  double l2h_min = 1e-12;
  double l2h_max = 1e-2;
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
};

struct DecayFit {
  double slope = 0.0;      // of log ∫|H|² against t
  double intercept = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;     // 95% interval on the slope
  double ci_high = 0.0;
  double gamma = 0.0;      // |H| decay rate, −slope/2
  int samples = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
};

/// Least-squares slope of log ∫|H|² over the rows inside `window`.
/// Throws WindowTooShort with fewer than 20 rows.
DecayFit decay_rate_fit(const std::vector<TraceRow>& rows, const FitWindow& window = {});

/// Lower bound √λ₁(t) ≥ √λ₁(0)·exp(−(2Λε+ε²)/(2γ)) − (K₀+Λ)ε/γ, with (ε, γ)
/// from the upper envelope of max|∇H| + max|H| and Λ the running max|A|.
/// Needs λ₁ at t = 0; not applicable (pass, noted) when the envelope does not decay.
CheckResult eigen_bound_check(const FlowTrace& trace);

/// max|H| ≤ (1/√κ̂ + max|∇H|)·ε^{1/(n+2)} with ε = ∫|H|². Margin relative to
/// the right side. Throws ScaleViolation when ε > r^{n+2}.
CheckResult c0_from_l2_check(const GeometryCache& geo, double kappa_hat, double r);

/// Quadrature of both sides of
///   ∫|∇X|² − h_lkm h_i^km X^i X^l ≥ ∫(div X)² − H^m h_mil X^i X^l − R̄(e_k, e_i, e^k, e_l) X^i X^l
/// for a tangent field given by its components X^i (n × nodes).
CheckResult vector_field_inequality_check(const GeometryCache& geo, const Immersion& imm, const Eigen::MatrixXd& x);

/// Worst margin over X = H and `random_trials` random smooth fields
/// (seeds seed, seed+1, ...). The witness worst_field is -1 for X = H.
CheckResult vector_field_inequality_suite(const GeometryCache& geo, const Immersion& imm, int random_trials = 20,
                                          unsigned seed = 1u);

/// Components H^i of the mean curvature as a tangent field.
Eigen::MatrixXd mean_curvature_field(const GeometryCache& geo);
/// Random smooth tangent field with Fourier modes |k_a| ≤ max_mode.
Eigen::MatrixXd random_tangent_field(const GridTopology& top, unsigned seed, int max_mode = 2);

/// First time max|A| exceeds 2·max|A|(0) or max|H| exceeds 2·max(max|H|(0), 1e-12),
/// linearly interpolated between rows; +∞ if never.
double short_time_doubling(const std::vector<TraceRow>& rows);
CheckResult short_time_doubling_check(const std::vector<TraceRow>& rows);

/// Vol non-increasing up to 1e-10·Vol(0).
CheckResult volume_monotonicity_check(const std::vector<TraceRow>& rows);
/// E(t) non-decreasing.
CheckResult energy_monotonicity_check(const std::vector<TraceRow>& rows);
/// min √det g(t)/√det g(0) ≥ e^{−(n+1)E(t)}·(1 − 5%) at every row.
CheckResult volume_form_check(const FlowTrace& trace);
/// Final defect ≤ 10·initial defect + 1e-12.
CheckResult defect_drift_check(const std::vector<TraceRow>& rows);
/// Surrogate short-time eigenvalue statement: λ₁(t) ≥ 0.9 λ₁(0) while
/// t ≤ t_window.
CheckResult eigenvalue_short_time_check(const std::vector<TraceRow>& rows, double t_window);

}  // namespace lmcf
