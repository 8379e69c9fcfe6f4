#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "lmcf/geometry.hpp"
#include "lmcf/immersion.hpp"
#include "lmcf/spectral.hpp"

namespace lmcf {

/// max|H| below which a base counts as minimal.
constexpr double kMinimalTolerance = 1e-5;

/// Samples a potential given as a function of the grid parameter u ∈ [0,1)^n.
Eigen::VectorXd sample_potential(const GridTopology& top, const std::function<double(double, double)>& fn);

/// Named analytic potentials: "cos" / "sin" give a·cos(2π(k₀u₀ + k₁u₁)) and
/// the sine counterpart; "zero" gives 0. Throws std::invalid_argument on an
/// unknown name.
Eigen::VectorXd named_potential(const GridTopology& top, const std::string& name, double amplitude, int k0, int k1 = 0);

/// Generator X = J∇f at every node, one column of chart components per node.
Eigen::MatrixXd hamiltonian_field(const GeometryCache& geo, const Immersion& imm, const Eigen::VectorXd& f);

/// Flows the immersion for parameter time s along X = J∇f with RK2 substeps,
/// recomputing X from the current geometry and keeping f fixed as a function
/// of the grid parameter. The potential is made mean-zero first. Throws ChartExit.
Immersion deform(const Immersion& base, const Eigen::VectorXd& f, double s, int substeps = 16);

/// Moves the immersion for unit time along X = J(c^♯) where c = c₀du₀ + c₁du₁
/// is a constant parameter-space 1-form. The flux of ω̄ changes by c, so this
/// is the non-hamiltonian direction that shifts the holonomy of α_H.
Immersion flux_shift(const Immersion& base, const Eigen::Vector2d& c, int substeps = 16);

/// max over nodes of |i_X ω̄ + df|_g / max|df|_g for X = J∇f, where
/// ω̄(u, v) = ḡ(Ju, v). Zero when the generated deformation is hamiltonian.
double hamiltonian_residual(const Immersion& base, const Eigen::VectorXd& f);

struct FlowConfig;

struct ExactnessCorrection {
  Eigen::Vector2d flux = Eigen::Vector2d::Zero();              // c passed to flux_shift
  Eigen::Vector2d initial_holonomy = Eigen::Vector2d::Zero();  // at the probe time, c = 0
  Eigen::Vector2d final_holonomy = Eigen::Vector2d::Zero();    // at the probe time, corrected
};

/// Flux correction c such that flowing flux_shift(initial, c) with `probe`
/// ends with vanishing holonomy of α_H. The discrete flow conserves exactness
/// only up to truncation error, which otherwise seeds the unstable
/// non-hamiltonian modes of a minimal torus. Newton iteration with a
/// finite-difference Jacobian; each evaluation is one probe flow.
ExactnessCorrection exactness_correction(const Immersion& initial, const FlowConfig& probe, int newton_steps = 2,
                                         double fd_step = 1e-4);

struct AngleVariation {
  double residual = 0.0;  // max-norm of (θ₊ − θ₋)/(2δs) + Δf + (R̄/2n) f, constant removed
  double scale = 0.0;     // max|Δf|
};

/// Checks the first variation of the Lagrangian angle under a hamiltonian
/// deformation of a minimal base. Throws NotMinimal or NotClosed.
AngleVariation angle_variation_residual(const Immersion& base, const Eigen::VectorXd& f, double ds = 1e-3,
                                        const AngleOptions& opts = {});

struct SecondVariation {
  double fd_value = 0.0;          // (V(δs) − 2V(0) + V(−δs)) / δs²
  double fd_value_coarse = 0.0;   // same with 2δs
  double richardson = 0.0;        // (4 fd_value − fd_value_coarse) / 3
  double spectral_value = 0.0;    // Σ a_i² λ_i (λ_i − R̄/2n)
  double captured_fraction = 0.0;
  double norm = 0.0;              // ‖f − mean‖
  Spectrum spectrum;              // modes used for the spectral value
};

/// Second variation of volume along the hamiltonian deformation generated by
/// f on a minimal base, by finite differences of volume and by the spectral
/// sum. The spectral sum uses the 12 lowest modes, or the 12 modes nearest
/// the Rayleigh quotient of f if those capture more of ‖f‖².
/// Throws NotMinimal, or SpectrumTruncation below 99.9% capture.
SecondVariation second_variation(const Immersion& base, const Eigen::VectorXd& f, double ds = 1e-3);

}  // namespace lmcf
