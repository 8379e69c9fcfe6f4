#include "lmcf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "lmcf/errors.hpp"
#include "lmcf/laplacian.hpp"

namespace lmcf {

namespace {

constexpr double kDegenerateRatio = 1e-10;

NodeGeometry node_geometry(const Immersion& imm, int p) {
  const GridTopology& top = imm.topology();
  const int n = top.dim();
  const AmbientSpace& space = imm.space();
  const AmbVec f = imm.point(p);
  const MetricJet jet = space.metric_jet(f, JetOrder::Connection);

  NodeGeometry ng;
  std::array<AmbVec, 4> second;
  for (int a = 0; a < n; ++a) {
    const double du = top.spacing(a);
    const AmbVec fp = a == 0 ? imm.shifted_point(p, 1, 0) : imm.shifted_point(p, 0, 1);
    const AmbVec fm = a == 0 ? imm.shifted_point(p, -1, 0) : imm.shifted_point(p, 0, -1);
    ng.frame[a] = (fp - fm) / (2.0 * du);
    second[3 * a] = (fp - 2.0 * f + fm) / (du * du);
  }
  if (n == 2) {
    const double scale = 1.0 / (4.0 * top.spacing(0) * top.spacing(1));
    second[1] = (imm.shifted_point(p, 1, 1) - imm.shifted_point(p, 1, -1) -
                 imm.shifted_point(p, -1, 1) + imm.shifted_point(p, -1, -1)) * scale;
    second[2] = second[1];
  }

  const AmbMat& gbar = jet.g;
  std::array<AmbVec, 2> gframe;  // ḡ e_i
  std::array<AmbVec, 2> jframe;  // J e_k
  std::array<AmbVec, 2> gjframe;  // ḡ J e_k
  for (int i = 0; i < n; ++i) {
    gframe[i] = gbar * ng.frame[i];
    jframe[i] = jet.J * ng.frame[i];
    gjframe[i] = gbar * jframe[i];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ng.g(i, j) = ng.frame[i].dot(gframe[j]);
  double det = 0.0;
  if (n == 1) {
    det = ng.g(0, 0);
    ng.g_inv(0, 0) = det > 0.0 ? 1.0 / det : 0.0;
  } else {
    det = ng.g.determinant();
    ng.g_inv = det > 0.0 ? Eigen::Matrix2d(ng.g.inverse()) : Eigen::Matrix2d::Zero();
  }
  if (!(det > 0.0)) throw DegenerateMetric("induced metric is not positive definite");
  ng.sqrt_det = std::sqrt(det);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const AmbVec& sij = second[2 * i + j];
      ng.ambient_hessian[2 * i + j] = sij + jet.christoffel(ng.frame[i], ng.frame[j]);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const AmbVec& nab = ng.ambient_hessian[2 * i + j];
      double tangential[2] = {0.0, 0.0};
      for (int k = 0; k < n; ++k) {
        ng.h(k, i, j) = -gjframe[k].dot(nab);
        tangential[k] = gframe[k].dot(nab);
      }
      for (int m = 0; m < n; ++m) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += ng.g_inv(m, k) * tangential[k];
        ng.gamma(m, i, j) = s;
      }
    }

  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) s += ng.g_inv(k, l) * ng.h(i, k, l);
    ng.alpha[i] = s;
  }
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) s += ng.g_inv(i, m) * ng.alpha[m];
    ng.mean_curvature[i] = s;
  }
  ng.mean_curvature_vector = AmbVec::Zero(f.size());
  for (int i = 0; i < n; ++i) ng.mean_curvature_vector -= ng.mean_curvature[i] * jframe[i];

  double a2 = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int pp = 0; pp < n; ++pp)
          for (int j = 0; j < n; ++j)
            for (int q = 0; q < n; ++q)
              a2 += ng.g_inv(k, l) * ng.g_inv(i, pp) * ng.g_inv(j, q) * ng.h(k, i, j) * ng.h(l, pp, q);
  ng.norm_a2 = a2;
  double h2 = 0.0;
  for (int i = 0; i < n; ++i) h2 += ng.alpha[i] * ng.mean_curvature[i];
  ng.norm_h2 = h2;
  ng.defect = n == 2 ? std::abs(jframe[0].dot(gframe[1])) : 0.0;
  return ng;
}

// Central difference of a node field along axis a.
template <typename Get>
double central(const GridTopology& top, int p, int a, Get get) {
  const auto plus = a == 0 ? top.shift(p, 1, 0) : top.shift(p, 0, 1);
  const auto minus = a == 0 ? top.shift(p, -1, 0) : top.shift(p, 0, -1);
  return (get(plus.node) - get(minus.node)) / (2.0 * top.spacing(a));
}

}  // namespace

double GeometryCache::max_abs_a() const {
  double m = 0.0;
  for (const auto& ng : nodes) m = std::max(m, std::sqrt(std::max(ng.norm_a2, 0.0)));
  return m;
}

double GeometryCache::max_abs_h() const {
  double m = 0.0;
  for (const auto& ng : nodes) m = std::max(m, std::sqrt(std::max(ng.norm_h2, 0.0)));
  return m;
}

double GeometryCache::max_defect() const {
  double m = 0.0;
  for (const auto& ng : nodes) m = std::max(m, ng.defect);
  return m;
}

double GeometryCache::symmetry_residual() const {
  double m = 0.0;
  for (const auto& ng : nodes)
    for (int k = 0; k < dim; ++k)
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          m = std::max({m, std::abs(ng.h(k, i, j) - ng.h(k, j, i)), std::abs(ng.h(k, i, j) - ng.h(i, k, j))});
  return m;
}

double GeometryCache::normality_residual() const {
  // ḡ(H, e_i) = -H^k ω̄(e_k, e_i): vanishes when the defect does.
  double m = 0.0;
  for (const auto& ng : nodes) {
    const double hnorm = std::sqrt(std::max(ng.norm_h2, 0.0));
    if (dim == 2) m = std::max(m, hnorm * ng.defect / std::sqrt(ng.g(0, 0) * ng.g(1, 1)));
  }
  return m;
}

GeometryCache geometry(const Immersion& imm) {
  GeometryCache geo;
  geo.dim = imm.dim();
  geo.topology = imm.topology();
  const int count = imm.node_count();
  geo.nodes.resize(static_cast<std::size_t>(count));
  for (int p = 0; p < count; ++p) geo.nodes[static_cast<std::size_t>(p)] = node_geometry(imm, p);

  std::vector<double> dets(static_cast<std::size_t>(count));
  for (int p = 0; p < count; ++p) {
    const double s = geo.nodes[static_cast<std::size_t>(p)].sqrt_det;
    dets[static_cast<std::size_t>(p)] = s * s;
  }
  std::vector<double> sorted = dets;
  std::nth_element(sorted.begin(), sorted.begin() + count / 2, sorted.end());
  const double median = sorted[static_cast<std::size_t>(count / 2)];
  for (double d : dets)
    if (d < kDegenerateRatio * median) throw DegenerateMetric("induced metric collapsed at a node (det g < 1e-10 median)");
  return geo;
}

double lagrangian_defect(const Immersion& imm) { return geometry(imm).max_defect(); }

double closedness_residual(const GeometryCache& geo) {
  if (geo.dim == 1) return 0.0;
  const GridTopology& top = geo.topology;
  const double du0 = top.spacing(0);
  const double du1 = top.spacing(1);
  double worst = 0.0;
  for (int p = 0; p < top.node_count(); ++p) {
    const int p10 = top.shift(p, 1, 0).node;
    const int p01 = top.shift(p, 0, 1).node;
    const int p11 = top.shift(p, 1, 1).node;
    const auto& n00 = geo.nodes[static_cast<std::size_t>(p)];
    const auto& n10 = geo.nodes[static_cast<std::size_t>(p10)];
    const auto& n01 = geo.nodes[static_cast<std::size_t>(p01)];
    const auto& n11 = geo.nodes[static_cast<std::size_t>(p11)];
    const double circulation = 0.5 * (n00.alpha[0] + n10.alpha[0]) * du0 +
                               0.5 * (n10.alpha[1] + n11.alpha[1]) * du1 -
                               0.5 * (n01.alpha[0] + n11.alpha[0]) * du0 -
                               0.5 * (n00.alpha[1] + n01.alpha[1]) * du1;
    const double vol = 0.25 * (n00.sqrt_det + n10.sqrt_det + n01.sqrt_det + n11.sqrt_det);
    worst = std::max(worst, std::abs(circulation) / (du0 * du1 * vol));
  }
  return worst;
}

double closedness_residual(const Immersion& imm) {
  if (imm.dim() == 1) return 0.0;
  return closedness_residual(geometry(imm));
}

std::vector<Eigen::Matrix2d> covariant_gradient_alpha(const GeometryCache& geo) {
  const GridTopology& top = geo.topology;
  const int n = geo.dim;
  std::vector<Eigen::Matrix2d> out(geo.nodes.size(), Eigen::Matrix2d::Zero());
  for (int p = 0; p < top.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    Eigen::Matrix2d& t = out[static_cast<std::size_t>(p)];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        double v = central(top, p, k, [&](int q) { return geo.nodes[static_cast<std::size_t>(q)].alpha[i]; });
        for (int m = 0; m < n; ++m) v -= ng.gamma(m, k, i) * ng.alpha[m];
        t(k, i) = v;
      }
  }
  return out;
}

std::vector<Eigen::Vector2d> rough_laplacian_alpha(const GeometryCache& geo) {
  const GridTopology& top = geo.topology;
  const int n = geo.dim;
  const std::vector<Eigen::Matrix2d> grad = covariant_gradient_alpha(geo);
  std::vector<Eigen::Vector2d> out(geo.nodes.size(), Eigen::Vector2d::Zero());
  for (int p = 0; p < top.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          // ∇_k (∇α)_{li} = ∂_k T_li - Γ^m_kl T_mi - Γ^m_ki T_lm
          double v = central(top, p, k, [&](int q) { return grad[static_cast<std::size_t>(q)](l, i); });
          const Eigen::Matrix2d& t = grad[static_cast<std::size_t>(p)];
          for (int m = 0; m < n; ++m) v -= ng.gamma(m, k, l) * t(m, i) + ng.gamma(m, k, i) * t(l, m);
          sum += ng.g_inv(k, l) * v;
        }
      out[static_cast<std::size_t>(p)][i] = sum;
    }
  }
  return out;
}

std::vector<double> grad_h_norm(const GeometryCache& geo) {
  const int n = geo.dim;
  const std::vector<Eigen::Matrix2d> grad = covariant_gradient_alpha(geo);
  std::vector<double> out(geo.nodes.size(), 0.0);
  for (std::size_t p = 0; p < geo.nodes.size(); ++p) {
    const NodeGeometry& ng = geo.nodes[p];
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s += ng.g_inv(k, l) * ng.g_inv(i, j) * grad[p](k, i) * grad[p](l, j);
    out[p] = std::sqrt(std::max(s, 0.0));
  }
  return out;
}

std::vector<double> grad_a_norm(const GeometryCache& geo) {
  const GridTopology& top = geo.topology;
  const int n = geo.dim;
  std::vector<double> out(geo.nodes.size(), 0.0);
  double t[2][2][2][2];  // t[l][k][i][j] = ∇_l h_kij
  for (int p = 0; p < top.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double v = central(top, p, l, [&](int q) { return geo.nodes[static_cast<std::size_t>(q)].h(k, i, j); });
            for (int m = 0; m < n; ++m)
              v -= ng.gamma(m, l, k) * ng.h(m, i, j) + ng.gamma(m, l, i) * ng.h(k, m, j) +
                   ng.gamma(m, l, j) * ng.h(k, i, m);
            t[l][k][i][j] = v;
          }
    double s = 0.0;
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int l2 = 0; l2 < n; ++l2)
              for (int k2 = 0; k2 < n; ++k2)
                for (int i2 = 0; i2 < n; ++i2)
                  for (int j2 = 0; j2 < n; ++j2)
                    s += ng.g_inv(l, l2) * ng.g_inv(k, k2) * ng.g_inv(i, i2) * ng.g_inv(j, j2) *
                         t[l][k][i][j] * t[l2][k2][i2][j2];
    out[static_cast<std::size_t>(p)] = std::sqrt(std::max(s, 0.0));
  }
  return out;
}

double weighted_dot(const GeometryCache& geo, const Eigen::VectorXd& f, const Eigen::VectorXd& h) {
  double s = 0.0;
  for (std::size_t p = 0; p < geo.nodes.size(); ++p)
    s += geo.nodes[p].sqrt_det * f[static_cast<Eigen::Index>(p)] * h[static_cast<Eigen::Index>(p)];
  return s * geo.topology.cell_volume();
}

double weighted_mean(const GeometryCache& geo, const Eigen::VectorXd& f) {
  double s = 0.0;
  double w = 0.0;
  for (std::size_t p = 0; p < geo.nodes.size(); ++p) {
    s += geo.nodes[p].sqrt_det * f[static_cast<Eigen::Index>(p)];
    w += geo.nodes[p].sqrt_det;
  }
  return s / w;
}

AnglePotential angle_potential(const Immersion& imm, const AngleOptions& opts) {
  return angle_potential(imm, geometry(imm), opts);
}

AnglePotential angle_potential(const Immersion& imm, const GeometryCache& geo, const AngleOptions& opts) {
  AnglePotential out;
  out.closedness = closedness_residual(geo);
  if (out.closedness > opts.tol_closed)
    throw NotClosed("mean curvature form is not closed (residual " + std::to_string(out.closedness) + ")");
  const GridTopology& top = imm.topology();
  const int n = top.dim();
  const int count = top.node_count();

  out.holonomy = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < n; ++a) {
    const int lines = a == 0 ? (n == 2 ? top.resolution(1) : 1) : top.resolution(0);
    const int along = top.resolution(a);
    double total = 0.0;
    for (int line = 0; line < lines; ++line) {
      int p = a == 0 ? top.index(0, line) : top.index(line, 0);
      double loop = 0.0;
      for (int step = 0; step < along; ++step) {
        const int q = a == 0 ? top.shift(p, 1, 0).node : top.shift(p, 0, 1).node;
        loop += 0.5 * (geo.nodes[static_cast<std::size_t>(p)].alpha[a] + geo.nodes[static_cast<std::size_t>(q)].alpha[a]) *
                top.spacing(a);
        p = q;
      }
      total += loop;
    }
    out.holonomy[a] = total / lines;
  }
  out.exact = out.holonomy.cwiseAbs().maxCoeff() < opts.tol_holonomy;

  // Least-squares θ: K θ = Dᵀ Q α̂, pinned at node 0, then shifted to mean zero.
  const DiscreteLaplacian lap(geo);
  const Eigen::VectorXd rhs = lap.one_form_rhs(geo);
  Eigen::SparseMatrix<double> k = lap.stiffness();
  Eigen::VectorXd b = rhs;
  for (Eigen::SparseMatrix<double>::InnerIterator it(k, 0); it; ++it) it.valueRef() = it.row() == 0 ? 1.0 : 0.0;
  for (int col = 1; col < count; ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it)
      if (it.row() == 0) it.valueRef() = 0.0;
  b[0] = 0.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(k);
  if (solver.info() != Eigen::Success) throw NoConvergence("angle potential: factorization failed");
  out.theta = solver.solve(b);
  out.theta.array() -= weighted_mean(geo, out.theta);
  return out;
}

Integrals integrals(const GeometryCache& geo) {
  Integrals out;
  const double cell = geo.topology.cell_volume();
  for (const auto& ng : geo.nodes) {
    out.volume += ng.sqrt_det * cell;
    out.l2_h += ng.norm_h2 * ng.sqrt_det * cell;
  }
  out.max_a = geo.max_abs_a();
  out.max_h = geo.max_abs_h();
  for (double v : grad_a_norm(geo)) out.max_grad_a = std::max(out.max_grad_a, v);
  for (double v : grad_h_norm(geo)) out.max_grad_h = std::max(out.max_grad_h, v);
  return out;
}

Integrals integrals(const Immersion& imm) { return integrals(geometry(imm)); }

void write_snapshot_csv(std::ostream& out, const Immersion& imm, const GeometryCache& geo) {
  const int d = imm.space().real_dim();
  out << "u0,u1";
  for (int a = 0; a < d; ++a) out << ",x" << a;
  out << ",abs_h,abs_a,defect\n";
  out << std::setprecision(17);
  const GridTopology& top = imm.topology();
  for (int p = 0; p < imm.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    out << top.param(p, 0) << ',' << (top.dim() == 2 ? top.param(p, 1) : 0.0);
    for (int a = 0; a < d; ++a) out << ',' << imm.coords()(a, p);
    out << ',' << std::sqrt(std::max(ng.norm_h2, 0.0)) << ',' << std::sqrt(std::max(ng.norm_a2, 0.0)) << ','
        << ng.defect << '\n';
  }
}

}  // namespace lmcf
