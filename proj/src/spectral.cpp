#include "lmcf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include "json.hpp"

#include "lmcf/errors.hpp"

namespace lmcf {

namespace {

void deflate_constants(Eigen::MatrixXd& v, const Eigen::VectorXd& mass) {
  const double total = mass.sum();
  for (Eigen::Index c = 0; c < v.cols(); ++c) v.col(c).array() -= mass.dot(v.col(c)) / total;
}

}  // namespace

std::vector<int> Spectrum::first_cluster() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (cluster[static_cast<std::size_t>(i)] == 0) out.push_back(i);
  return out;
}

Spectrum lowest_eigenpairs(const Immersion& imm, int k, const EigenOptions& opts) {
  return lowest_eigenpairs(geometry(imm), k, opts);
}

namespace {

// Block inverse iteration on (K - σM)⁻¹M with Rayleigh–Ritz, keeping the k
// Ritz pairs whose eigenvalues lie closest to σ.
Spectrum block_inverse_iteration(const GeometryCache& geo, double sigma_rel, bool relative, int k,
                                 const EigenOptions& opts) {
  const DiscreteLaplacian lap(geo);
  const Eigen::SparseMatrix<double>& stiff = lap.stiffness();
  const Eigen::VectorXd& mass = lap.mass();
  const int n = lap.size();
  const int block = std::min(n - 1, k + opts.guard_vectors);
  if (block < k) throw std::invalid_argument("eigenpairs: grid too small for k modes");

  double lambda_max = 0.0;
  for (int p = 0; p < n; ++p) lambda_max = std::max(lambda_max, stiff.coeff(p, p) / mass[p]);
  const double sigma = relative ? -sigma_rel * lambda_max : sigma_rel;

  Eigen::SparseMatrix<double> shifted = stiff;
  for (int p = 0; p < n; ++p) shifted.coeffRef(p, p) -= sigma * mass[p];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw NoConvergence("eigenpairs: factorization failed");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd v(n, block);
  for (int c = 0; c < block; ++c)
    for (int p = 0; p < n; ++p) v(p, c) = normal(rng);
  deflate_constants(v, mass);

  Spectrum spec;
  Eigen::VectorXd ritz(k);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Eigen::MatrixXd w(n, block);
    for (int c = 0; c < block; ++c) w.col(c) = solver.solve(mass.cwiseProduct(v.col(c)));
    deflate_constants(w, mass);
    const Eigen::MatrixXd kw = w.transpose() * (stiff * w);
    const Eigen::MatrixXd mw = w.transpose() * mass.asDiagonal() * w;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz_solver(0.5 * (kw + kw.transpose()),
                                                                         0.5 * (mw + mw.transpose()));
    if (ritz_solver.info() != Eigen::Success) throw NoConvergence("eigenpairs: Rayleigh-Ritz failed");
    const Eigen::VectorXd values = ritz_solver.eigenvalues();
    // Order Ritz pairs by distance to the shift (ties broken by value).
    std::vector<int> order(static_cast<std::size_t>(block));
    for (int c = 0; c < block; ++c) order[static_cast<std::size_t>(c)] = c;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(values[a] - sigma) < std::abs(values[b] - sigma);
    });
    std::sort(order.begin(), order.begin() + k, [&](int a, int b) { return values[a] < values[b]; });
    Eigen::MatrixXd vecs(block, block);
    for (int c = 0; c < block; ++c) {
      vecs.col(c) = ritz_solver.eigenvectors().col(order[static_cast<std::size_t>(c)]);
      if (c < k) ritz[c] = values[order[static_cast<std::size_t>(c)]];
    }
    v = w * vecs;

    double worst = 0.0;
    spec.residuals.assign(static_cast<std::size_t>(k), 0.0);
    const Eigen::MatrixXd kv = stiff * v.leftCols(k);
    for (int c = 0; c < k; ++c) {
      const Eigen::VectorXd r = kv.col(c).cwiseQuotient(mass) - ritz[c] * v.col(c);
      const double res = r.cwiseAbs().maxCoeff();
      spec.residuals[static_cast<std::size_t>(c)] = res;
      worst = std::max(worst, res / std::max(1.0, std::abs(ritz[c])));
    }
    spec.iterations = it;
    if (worst < opts.tol) break;
    if (it == opts.max_iterations) {
      std::ostringstream msg;
      msg << "eigenpairs: no convergence after " << it << " iterations (relative residual " << worst << ")";
      throw NoConvergence(msg.str());
    }
  }

  spec.eigenvalues.assign(ritz.data(), ritz.data() + k);
  spec.eigenfunctions = v.leftCols(k);
  spec.cluster_tolerance = opts.cluster_rel_tol * spec.eigenvalues.front();
  spec.cluster.assign(static_cast<std::size_t>(k), 0);
  int id = 0;
  for (int i = 1; i < k; ++i) {
    if (spec.eigenvalues[static_cast<std::size_t>(i)] - spec.eigenvalues[static_cast<std::size_t>(i - 1)] >
        spec.cluster_tolerance)
      ++id;
    spec.cluster[static_cast<std::size_t>(i)] = id;
  }
  return spec;
}

}  // namespace

Spectrum lowest_eigenpairs(const GeometryCache& geo, int k, const EigenOptions& opts) {
  if (k < 1 || k > 12) throw std::invalid_argument("lowest_eigenpairs: k must be in [1, 12]");
  return block_inverse_iteration(geo, 1e-4, true, k, opts);
}

Spectrum eigenpairs_near(const GeometryCache& geo, double sigma, int k, const EigenOptions& opts) {
  if (k < 1 || k > 12) throw std::invalid_argument("eigenpairs_near: k must be in [1, 12]");
  return block_inverse_iteration(geo, sigma, false, k, opts);
}

VariationClass classify_variation(const GeometryCache& geo, const Spectrum& spectrum,
                                  const Eigen::VectorXd& f, double tol_essential) {
  const std::vector<int> first = spectrum.first_cluster();
  if (first.empty()) throw ClusterAmbiguous("classify_variation: empty spectrum");
  const int last = first.back();
  if (last + 1 >= spectrum.size())
    throw ClusterAmbiguous("classify_variation: the lambda_1 cluster fills the computed spectrum");
  const double gap = spectrum.eigenvalues[static_cast<std::size_t>(last + 1)] -
                     spectrum.eigenvalues[static_cast<std::size_t>(last)];
  if (gap < 2.0 * spectrum.cluster_tolerance)
    throw ClusterAmbiguous("classify_variation: lambda_1 cluster not separated from the next eigenvalue");

  VariationClass out;
  out.norm = std::sqrt(weighted_dot(geo, f, f));
  const Eigen::VectorXd centered = f.array() - weighted_mean(geo, f);
  const double centered_norm2 = weighted_dot(geo, centered, centered);
  out.coefficients.resize(static_cast<std::size_t>(spectrum.size()));
  double captured = 0.0;
  for (int i = 0; i < spectrum.size(); ++i) {
    const double a = weighted_dot(geo, centered, spectrum.eigenfunctions.col(i));
    out.coefficients[static_cast<std::size_t>(i)] = a;
    captured += a * a;
  }
  out.captured_fraction = centered_norm2 > 0.0 ? captured / centered_norm2 : 1.0;
  out.parallel = Eigen::VectorXd::Zero(f.size());
  for (int i : first) out.parallel += out.coefficients[static_cast<std::size_t>(i)] * spectrum.eigenfunctions.col(i);
  out.perpendicular = centered - out.parallel;
  const double perp = std::sqrt(std::max(0.0, weighted_dot(geo, out.perpendicular, out.perpendicular)));
  out.essential = perp > tol_essential * out.norm;
  return out;
}

std::string spectrum_json(const Spectrum& spectrum) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < spectrum.size(); ++i) {
    arr.push_back({{"index", i + 1},
                   {"eigenvalue", spectrum.eigenvalues[static_cast<std::size_t>(i)]},
                   {"residual", spectrum.residuals[static_cast<std::size_t>(i)]},
                   {"cluster", spectrum.cluster[static_cast<std::size_t>(i)]}});
  }
  return arr.dump(2);
}

}  // namespace lmcf
