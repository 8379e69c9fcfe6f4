#include "lmcf/laplacian.hpp"

#include <vector>

namespace lmcf {

DiscreteLaplacian::DiscreteLaplacian(const GeometryCache& geo)
    : dim_(geo.dim), topology_(geo.topology) {
  const GridTopology& top = topology_;
  const int count = top.node_count();
  const double cell = top.cell_volume();
  mass_.resize(count);
  for (int p = 0; p < count; ++p) mass_[p] = geo.nodes[static_cast<std::size_t>(p)].sqrt_det * cell;

  auto coeff = [&](int p, int i, int j) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    return ng.sqrt_det * ng.g_inv(i, j);
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(count) * (dim_ == 2 ? 24 : 4));
  for (int a = 0; a < dim_; ++a) {
    edge_weight_[a].assign(static_cast<std::size_t>(count), 0.0);
    const double du = top.spacing(a);
    for (int p = 0; p < count; ++p) {
      const int q = a == 0 ? top.shift(p, 1, 0).node : top.shift(p, 0, 1).node;
      const double w = 0.5 * (coeff(p, a, a) + coeff(q, a, a)) * cell / (du * du);
      edge_weight_[a][static_cast<std::size_t>(p)] = w;
      trip.emplace_back(p, p, w);
      trip.emplace_back(q, q, w);
      trip.emplace_back(p, q, -w);
      trip.emplace_back(q, p, -w);
    }
  }
  if (dim_ == 2) {
    cell_weight_.assign(static_cast<std::size_t>(count), 0.0);
    const double du0 = top.spacing(0);
    const double du1 = top.spacing(1);
    for (int p = 0; p < count; ++p) {
      const int c[4] = {p, top.shift(p, 1, 0).node, top.shift(p, 0, 1).node, top.shift(p, 1, 1).node};
      const double c01 = 0.25 * (coeff(c[0], 0, 1) + coeff(c[1], 0, 1) + coeff(c[2], 0, 1) + coeff(c[3], 0, 1));
      const double w = c01 * cell;
      cell_weight_[static_cast<std::size_t>(p)] = w;
      // Corner order (00, 10, 01, 11).
      const double av[4] = {-1.0 / (2 * du0), 1.0 / (2 * du0), -1.0 / (2 * du0), 1.0 / (2 * du0)};
      const double cv[4] = {-1.0 / (2 * du1), -1.0 / (2 * du1), 1.0 / (2 * du1), 1.0 / (2 * du1)};
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) trip.emplace_back(c[r], c[s], w * (av[r] * cv[s] + cv[r] * av[s]));
    }
  }
  stiffness_.resize(count, count);
  stiffness_.setFromTriplets(trip.begin(), trip.end());
  stiffness_.makeCompressed();
}

Eigen::VectorXd DiscreteLaplacian::apply(const Eigen::VectorXd& f) const {
  return -(stiffness_ * f).cwiseQuotient(mass_);
}

Eigen::VectorXd DiscreteLaplacian::one_form_rhs(const GeometryCache& geo) const {
  const GridTopology& top = topology_;
  const int count = top.node_count();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(count);
  // Edge integrals α̂ along +e_a from node p.
  std::vector<double> edge_int[2];
  for (int a = 0; a < dim_; ++a) {
    edge_int[a].assign(static_cast<std::size_t>(count), 0.0);
    const double du = top.spacing(a);
    for (int p = 0; p < count; ++p) {
      const int q = a == 0 ? top.shift(p, 1, 0).node : top.shift(p, 0, 1).node;
      const double ahat = 0.5 * (geo.nodes[static_cast<std::size_t>(p)].alpha[a] +
                                 geo.nodes[static_cast<std::size_t>(q)].alpha[a]) * du;
      edge_int[a][static_cast<std::size_t>(p)] = ahat;
      const double w = edge_weight_[a][static_cast<std::size_t>(p)];
      b[q] += w * ahat;
      b[p] -= w * ahat;
    }
  }
  if (dim_ == 2) {
    const double du0 = top.spacing(0);
    const double du1 = top.spacing(1);
    for (int p = 0; p < count; ++p) {
      const int c[4] = {p, top.shift(p, 1, 0).node, top.shift(p, 0, 1).node, top.shift(p, 1, 1).node};
      // Cell-averaged components of α̂ (bottom/top edges along u0, left/right along u1).
      const double a_avg = (edge_int[0][static_cast<std::size_t>(c[0])] + edge_int[0][static_cast<std::size_t>(c[2])]) / (2 * du0);
      const double c_avg = (edge_int[1][static_cast<std::size_t>(c[0])] + edge_int[1][static_cast<std::size_t>(c[1])]) / (2 * du1);
      const double w = cell_weight_[static_cast<std::size_t>(p)];
      const double av[4] = {-1.0 / (2 * du0), 1.0 / (2 * du0), -1.0 / (2 * du0), 1.0 / (2 * du0)};
      const double cv[4] = {-1.0 / (2 * du1), -1.0 / (2 * du1), 1.0 / (2 * du1), 1.0 / (2 * du1)};
      for (int r = 0; r < 4; ++r) b[c[r]] += w * (a_avg * cv[r] + c_avg * av[r]);
    }
  }
  return b;
}

Eigen::VectorXd laplace_apply(const Immersion& imm, const Eigen::VectorXd& f) {
  return DiscreteLaplacian(geometry(imm)).apply(f);
}

}  // namespace lmcf
