#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmcf/geometry.hpp"
#include "lmcf/laplacian.hpp"

namespace lmcf {

/// Lowest nonzero eigenpairs of -Δ on an immersion.
struct Spectrum {
  std::vector<double> eigenvalues;   // λ₁ ≤ λ₂ ≤ … (λ₀ = 0 is implicit)
  std::vector<double> residuals;     // max |−Δη − λη|
  std::vector<int> cluster;          // cluster id per eigenvalue, 0 = the λ₁ cluster
  Eigen::MatrixXd eigenfunctions;    // one column per eigenvalue, √g-weighted orthonormal
  double cluster_tolerance = 0.0;
  int iterations = 0;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double lambda1() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
  /// Indices of the eigenvalues in the λ₁ cluster.
  std::vector<int> first_cluster() const;
};

struct EigenOptions {
  double tol = 1e-8;                 // residual, relative to max(1, λ)
  int max_iterations = 500;
  double cluster_rel_tol = 1e-3;     // tol_eig_cluster = cluster_rel_tol · λ₁
  int guard_vectors = 8;
  unsigned seed = 12345u;
};

/// The k ≤ 12 smallest nonzero eigenpairs via shifted block inverse iteration
/// with Rayleigh–Ritz, deflated against the constants. Throws NoConvergence.
Spectrum lowest_eigenpairs(const Immersion& imm, int k, const EigenOptions& opts = {});
Spectrum lowest_eigenpairs(const GeometryCache& geo, int k, const EigenOptions& opts = {});

/// The k eigenpairs of -Δ (constants excluded) closest to σ, by shift-invert
/// iteration. `cluster` groups neighbours as in lowest_eigenpairs but id 0 is
/// then the lowest returned cluster, not necessarily λ₁.
Spectrum eigenpairs_near(const GeometryCache& geo, double sigma, int k, const EigenOptions& opts = {});

struct VariationClass {
  Eigen::VectorXd parallel;       // projection onto E_{λ₁}
  Eigen::VectorXd perpendicular;  // mean-free remainder
  std::vector<double> coefficients;  // a_i = ⟨f, η_i⟩
  double captured_fraction = 0.0;    // Σ a_i² / ‖f - mean‖²
  double norm = 0.0;                 // ‖f‖
  bool essential = false;
};

/// Splits a potential into its first-eigenspace part and the remainder.
/// Throws ClusterAmbiguous when the λ₁ cluster is not separated from the
/// next eigenvalue by at least 2·tol_eig_cluster.
VariationClass classify_variation(const GeometryCache& geo, const Spectrum& spectrum,
                                  const Eigen::VectorXd& f, double tol_essential = 1e-2);

/// JSON list of {index, eigenvalue, residual, cluster}.
std::string spectrum_json(const Spectrum& spectrum);

}  // namespace lmcf
