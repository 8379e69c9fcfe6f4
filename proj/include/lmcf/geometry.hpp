#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "lmcf/immersion.hpp"

namespace lmcf {

/// Extrinsic geometry at one node. Indices run over 0..n-1; only the leading
/// n×n block of the 2×2 matrices is meaningful.
///
/// Conventions: h(k, i, j) = h_kij = -ḡ(J e_k, ∇̄_{e_i} e_j) (fully symmetric
/// for Lagrangians), H^i = g^{im} g^{kl} h_mkl, α_i = g_ij H^j, and the mean
/// curvature vector is H = -H^i J e_i.
struct NodeGeometry {
  std::array<AmbVec, 2> frame;           // e_i = ∂_i F
  std::array<AmbVec, 4> ambient_hessian;  // ∇̄_{e_i} e_j, index 2i+j
  Eigen::Matrix2d g = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d g_inv = Eigen::Matrix2d::Identity();
  double sqrt_det = 1.0;
  double h_data[8] = {};
  double gamma_data[8] = {};  // induced Christoffels Γ^m_ij
  Eigen::Vector2d mean_curvature = Eigen::Vector2d::Zero();  // H^i
  Eigen::Vector2d alpha = Eigen::Vector2d::Zero();            // α_i
  AmbVec mean_curvature_vector;                               // -H^i J e_i
  double norm_a2 = 0.0;
  double norm_h2 = 0.0;
  double defect = 0.0;  // |ω̄(e_0, e_1)|

  double h(int k, int i, int j) const { return h_data[4 * k + 2 * i + j]; }
  double& h(int k, int i, int j) { return h_data[4 * k + 2 * i + j]; }
  double gamma(int m, int i, int j) const { return gamma_data[4 * m + 2 * i + j]; }
  double& gamma(int m, int i, int j) { return gamma_data[4 * m + 2 * i + j]; }
};

/// Per-node derived tensors of an immersion. Produced by `geometry`, never mutated.
struct GeometryCache {
  int dim = 1;
  GridTopology topology;
  std::vector<NodeGeometry> nodes;

  double max_abs_a() const;
  double max_abs_h() const;
  double max_defect() const;
  /// max |h_kij - h_kji| and max |h_kij - h_ikj|.
  double symmetry_residual() const;
  /// max over nodes of |ḡ(H, e_i)| / (|H|·|e_i|) scale; zero when H is normal.
  double normality_residual() const;
};

/// Computes every per-node field with 2nd-order central differences.
/// Throws ChartExit or DegenerateMetric.
GeometryCache geometry(const Immersion& imm);

/// sup-norm of ω̄(e_i, e_j) over nodes.
double lagrangian_defect(const Immersion& imm);

/// sup-norm over grid plaquettes of the discrete |dα_H|; 0 for curves.
double closedness_residual(const Immersion& imm);
double closedness_residual(const GeometryCache& geo);

/// Covariant derivative ∇_k α_i at every node (index 2k+i).
std::vector<Eigen::Matrix2d> covariant_gradient_alpha(const GeometryCache& geo);
/// Rough Laplacian g^{kl} ∇_k ∇_l α_i at every node.
std::vector<Eigen::Vector2d> rough_laplacian_alpha(const GeometryCache& geo);
/// Pointwise |∇H| (= |∇α_H|) and |∇A| with induced-connection terms.
std::vector<double> grad_h_norm(const GeometryCache& geo);
std::vector<double> grad_a_norm(const GeometryCache& geo);

struct AnglePotential {
  Eigen::VectorXd theta;     // weighted mean zero
  Eigen::VectorXd holonomy;  // ∮ α_H per generator loop
  double closedness = 0.0;
  bool exact = false;
};

struct AngleOptions {
  double tol_closed = 1e-2;
  double tol_holonomy = 1e-6;
};

/// Least-squares potential θ with dθ ≈ α_H, plus the holonomy of α_H.
/// Throws NotClosed when the closedness residual exceeds `tol_closed`.
AnglePotential angle_potential(const Immersion& imm, const AngleOptions& opts = {});
AnglePotential angle_potential(const Immersion& imm, const GeometryCache& geo,
                               const AngleOptions& opts = {});

struct Integrals {
  double volume = 0.0;
  double l2_h = 0.0;  // ∫|H|² dμ
  double max_a = 0.0;
  double max_h = 0.0;
  double max_grad_a = 0.0;
  double max_grad_h = 0.0;
};

Integrals integrals(const Immersion& imm);
Integrals integrals(const GeometryCache& geo);

/// Weighted inner product Σ √g f h ΠΔu.
double weighted_dot(const GeometryCache& geo, const Eigen::VectorXd& f, const Eigen::VectorXd& h);
double weighted_mean(const GeometryCache& geo, const Eigen::VectorXd& f);

/// Snapshot CSV, one row per node with columns
/// u0,u1,x0,...,x{2n-1},abs_h,abs_a,defect (u1 = 0 for curves).
void write_snapshot_csv(std::ostream& out, const Immersion& imm, const GeometryCache& geo);

}  // namespace lmcf
