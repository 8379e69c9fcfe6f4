#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lmcf/geometry.hpp"

namespace lmcf {

/// Flux-form Laplace–Beltrami operator Δf = (1/√g) ∂_i(√g g^{ij} ∂_j f) on
/// the periodic grid.
///
/// The operator is assembled as Δ = -M⁻¹K where M = diag(√g ΠΔu) and K is
/// the Hessian of the discrete Dirichlet energy: compact edge differences for
/// the diagonal terms, cell-averaged differences for the mixed term. K is
/// symmetric positive semidefinite with the constants as its only kernel.
class DiscreteLaplacian {
 public:
  explicit DiscreteLaplacian(const GeometryCache& geo);

  int size() const { return static_cast<int>(mass_.size()); }
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
  const Eigen::VectorXd& mass() const { return mass_; }

  /// Δf at every node.
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;

  /// Right-hand side Dᵀ Q α̂ of the least-squares problem min Q(Dθ - α̂),
  /// where α̂ holds trapezoid integrals of α_H along grid edges.
  Eigen::VectorXd one_form_rhs(const GeometryCache& geo) const;

 private:
  int dim_ = 1;
  GridTopology topology_;
  Eigen::SparseMatrix<double> stiffness_;
  Eigen::VectorXd mass_;
  std::vector<double> edge_weight_[2];  // per node, edge towards +e_a
  std::vector<double> cell_weight_;     // per node, cell with lower-left corner at node
};

/// Convenience wrapper: Δf on the immersion's induced metric.
Eigen::VectorXd laplace_apply(const Immersion& imm, const Eigen::VectorXd& f);

}  // namespace lmcf
