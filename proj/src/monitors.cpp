#include "lmcf/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>

#include "lmcf/errors.hpp"
#include "lmcf/laplacian.hpp"

namespace lmcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kL2Floor = 1e-24;

std::vector<std::array<int, 2>> stencil_offsets(int dim, int stencil) {
  if (dim == 1) return {{1, 0}, {-1, 0}};
  std::vector<std::array<int, 2>> out;
  for (int d0 = -2; d0 <= 2; ++d0)
    for (int d1 = -2; d1 <= 2; ++d1) {
      const int a = std::abs(d0), b = std::abs(d1);
      if (a + b == 0) continue;
      const bool king = a <= 1 && b <= 1;
      const bool knight = (a == 1 && b == 2) || (a == 2 && b == 1);
      if (king || (stencil == 16 && knight)) out.push_back({d0, d1});
    }
  return out;
}

double edge_length(const GeometryCache& geo, int p, int q, const std::array<int, 2>& d) {
  const GridTopology& top = geo.topology;
  Eigen::Vector2d du(d[0] * top.spacing(0), top.dim() == 2 ? d[1] * top.spacing(1) : 0.0);
  const Eigen::Matrix2d g = 0.5 * (geo.nodes[static_cast<std::size_t>(p)].g + geo.nodes[static_cast<std::size_t>(q)].g);
  if (top.dim() == 1) return std::sqrt(g(0, 0)) * std::abs(du[0]);
  return std::sqrt(std::max(0.0, du.dot(g * du)));
}

// Vol(B(q, s)) for each s in `radii` (ascending) from one Dijkstra sweep.
std::vector<double> ball_volumes(const GeometryCache& geo, const Eigen::VectorXd& mass, const std::vector<double>& cell,
                                 const std::vector<std::array<int, 2>>& offsets, int center,
                                 const std::vector<double>& radii, double cell_max) {
  const int count = geo.topology.node_count();
  std::vector<double> dist(static_cast<std::size_t>(count), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(center)] = 0.0;
  queue.push({0.0, center});
  const double cutoff = radii.back() + cell_max;
  std::vector<int> reached;
  while (!queue.empty()) {
    const auto [d, p] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(p)]) continue;
    if (d > cutoff) break;
    reached.push_back(p);
    for (const auto& off : offsets) {
      const int q = geo.topology.shift(p, off[0], off[1]).node;
      const double nd = d + edge_length(geo, p, q, off);
      if (nd < dist[static_cast<std::size_t>(q)]) {
        dist[static_cast<std::size_t>(q)] = nd;
        queue.push({nd, q});
      }
    }
  }
  std::vector<double> out(radii.size(), 0.0);
  for (int p : reached) {
    const auto ps = static_cast<std::size_t>(p);
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double frac = std::clamp((radii[k] - dist[ps]) / cell[ps] + 0.5, 0.0, 1.0);
      out[k] += frac * mass[p];
    }
  }
  return out;
}

double relative(double margin, double scale) { return scale > 0.0 ? margin / scale : margin; }

// Latest finite λ₁ at or before row i.
double latest_lambda(const std::vector<TraceRow>& rows, std::size_t i) {
  for (std::size_t k = i + 1; k-- > 0;)
    if (std::isfinite(rows[k].lambda1)) return rows[k].lambda1;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double noncollapse_estimate(const GeometryCache& geo, double r, const NoncollapseOptions& opts) {
  if (!(r > 0.0)) throw std::invalid_argument("noncollapse_estimate: r must be positive");
  if (opts.stencil != 8 && opts.stencil != 16) throw std::invalid_argument("noncollapse_estimate: stencil must be 8 or 16");
  const int n = geo.dim;
  const DiscreteLaplacian lap(geo);
  const Eigen::VectorXd& mass = lap.mass();
  std::vector<double> cell(static_cast<std::size_t>(mass.size()));
  double cell_max = 0.0;
  for (Eigen::Index p = 0; p < mass.size(); ++p) {
    cell[static_cast<std::size_t>(p)] = std::pow(mass[p], 1.0 / n);
    cell_max = std::max(cell_max, cell[static_cast<std::size_t>(p)]);
  }
  const auto offsets = stencil_offsets(n, opts.stencil);
  const std::vector<double> radii{r / 4.0, r / 2.0, r};

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> pick(0, geo.topology.node_count() - 1);
  double kappa = kInf;
  for (int sample = 0; sample < std::max(1, opts.sample_count); ++sample) {
    const std::vector<double> vols = ball_volumes(geo, mass, cell, offsets, pick(rng), radii, cell_max);
    for (std::size_t k = 0; k < radii.size(); ++k) kappa = std::min(kappa, vols[k] / std::pow(radii[k], n));
  }
  return kappa;
}

double noncollapse_estimate(const Immersion& imm, double r, const NoncollapseOptions& opts) {
  return noncollapse_estimate(geometry(imm), r, opts);
}

void ClassParams::validate(bool class_b) const {
  std::vector<std::string> bad;
  if (!(kappa > 0.0)) bad.emplace_back("kappa must be positive");
  if (!(r > 0.0)) bad.emplace_back("r must be positive");
  if (!(lambda_a > 0.0)) bad.emplace_back("Lambda must be positive");
  if (!(eps > 0.0)) bad.emplace_back("eps must be positive");
  if (class_b && !(delta > 0.0)) bad.emplace_back("delta must be positive for class B");
  if (bad.empty()) return;
  std::ostringstream msg;
  msg << "invalid class parameters:";
  for (const auto& b : bad) msg << "\n  " << b;
  throw ValidationError(msg.str());
}

CheckResult class_membership(const Immersion& imm, const ClassParams& params, ImmersionClass cls,
                             const NoncollapseOptions& opts) {
  const bool class_b = cls == ImmersionClass::B;
  params.validate(class_b);
  const GeometryCache geo = geometry(imm);
  CheckResult out;
  out.name = class_b ? "class_B_membership" : "class_A_membership";
  const double max_a = geo.max_abs_a();
  const double max_h = geo.max_abs_h();
  const double kappa_hat = noncollapse_estimate(geo, params.r, opts);
  out.witness("max_a", max_a);
  out.witness("max_h", max_h);
  out.witness("kappa_hat", kappa_hat);
  double margin = std::min({(params.lambda_a - max_a) / params.lambda_a, (params.eps - max_h) / params.eps,
                            (kappa_hat - params.kappa) / params.kappa});
  if (class_b) {
    const double threshold = imm.space().scalar_curvature() / (2.0 * imm.dim()) + params.delta;
    const double lambda1 = lowest_eigenpairs(geo, 4).lambda1();
    out.witness("lambda1", lambda1);
    out.witness("lambda1_threshold", threshold);
    margin = std::min(margin, relative(lambda1 - threshold, std::abs(threshold)));
    bool exact = false;
    try {
      const AnglePotential angle = angle_potential(imm, geo);
      exact = angle.exact;
      out.witness("holonomy", angle.holonomy.cwiseAbs().maxCoeff());
    } catch (const NotClosed&) {
      out.note = "mean curvature form not closed";
    }
    out.witness("exact", exact ? 1.0 : 0.0);
    if (!exact) margin = std::min(margin, -1.0);
  }
  out.margin = margin;
  out.pass = margin >= 0.0;
  return out;
}

CheckResult gronwall_check(const FlowTrace& trace, bool exact) {
  CheckResult out;
  out.name = exact ? "gronwall_exact" : "gronwall";
  const auto& rows = trace.rows;
  const double rn = trace.scalar_curvature / trace.dim;
  const double half = trace.scalar_curvature / (2.0 * trace.dim);
  double worst = kInf, worst_t = 0.0, worst_rate = 0.0, worst_bound = 0.0;
  int checked = 0, skipped = 0;
  double max_gap = 0.0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const TraceRow& a = rows[i];
    const TraceRow& b = rows[i + 1];
    const double dt = b.t - a.t;
    if (!(dt > 0.0)) continue;
    max_gap = std::max(max_gap, dt);
    if (a.l2h < kL2Floor || b.l2h < kL2Floor) {
      ++skipped;
      continue;
    }
    const double rate = std::log(b.l2h / a.l2h) / dt;
    const double lam = std::max(a.max_a, b.max_a);
    const double eps = std::max(a.max_h, b.max_h);
    double bound = rn + 2.0 * lam * eps;
    double scale = std::max({std::abs(rate), std::abs(rn), 2.0 * lam * eps});
    if (exact) {
      const double l1 = latest_lambda(rows, i);
      if (!std::isfinite(l1)) {
        ++skipped;
        continue;
      }
      bound = -2.0 * (l1 - half - lam * eps);
      scale = std::max({std::abs(rate), 2.0 * std::abs(l1), std::abs(rn), 2.0 * lam * eps});
    }
    const double m = relative(bound - rate, scale);
    ++checked;
    if (m < worst) {
      worst = m;
      worst_t = a.t;
      worst_rate = rate;
      worst_bound = bound;
    }
  }
  out.witness("intervals_checked", checked);
  out.witness("intervals_skipped", skipped);
  out.witness("max_row_gap", max_gap);
  if (checked == 0) {
    out.note = "no interval above the L2 floor";
    return out;
  }
  out.witness("worst_t", worst_t);
  out.witness("worst_rate", worst_rate);
  out.witness("worst_bound", worst_bound);
  out.margin = worst;
  out.pass = worst >= -kInequalityTolerance;
  return out;
}

DecayFit decay_rate_fit(const std::vector<TraceRow>& rows, const FitWindow& window) {
  std::vector<double> ts, ys;
  for (const TraceRow& r : rows) {
    if (r.t < window.t_min || r.t > window.t_max) continue;
    if (!(r.l2h >= window.l2h_min && r.l2h <= window.l2h_max)) continue;
    ts.push_back(r.t);
    ys.push_back(std::log(r.l2h));
  }
  const int m = static_cast<int>(ts.size());
  if (m < 20) {
    std::ostringstream msg;
    msg << "decay_rate_fit: " << m << " samples in the fit window, need 20";
    throw WindowTooShort(msg.str());
  }
  double tm = 0.0, ym = 0.0;
  for (int i = 0; i < m; ++i) {
    tm += ts[static_cast<std::size_t>(i)];
    ym += ys[static_cast<std::size_t>(i)];
  }
  tm /= m;
  ym /= m;
  double stt = 0.0, sty = 0.0;
  for (int i = 0; i < m; ++i) {
    const double dt = ts[static_cast<std::size_t>(i)] - tm;
    stt += dt * dt;
    sty += dt * (ys[static_cast<std::size_t>(i)] - ym);
  }
  if (!(stt > 0.0)) throw WindowTooShort("decay_rate_fit: all samples at one time");
  DecayFit fit;
  fit.samples = m;
  fit.slope = sty / stt;
  fit.intercept = ym - fit.slope * tm;
  double sse = 0.0;
  for (int i = 0; i < m; ++i) {
    const double e = ys[static_cast<std::size_t>(i)] - fit.intercept - fit.slope * ts[static_cast<std::size_t>(i)];
    sse += e * e;
  }
  fit.std_error = std::sqrt(sse / (m - 2) / stt);
  // Normal quantile; the window holds at least 20 samples.
  fit.ci_low = fit.slope - 1.96 * fit.std_error;
  fit.ci_high = fit.slope + 1.96 * fit.std_error;
  fit.gamma = -fit.slope / 2.0;
  fit.t_begin = ts.front();
  fit.t_end = ts.back();
  return fit;
}

CheckResult eigen_bound_check(const FlowTrace& trace) {
  CheckResult out;
  out.name = "eigen_bound";
  const auto& rows = trace.rows;
  if (rows.empty() || !std::isfinite(rows.front().lambda1)) {
    out.note = "not applicable: no lambda1 at t = 0";
    return out;
  }
  std::vector<double> ts, ys;
  for (const TraceRow& r : rows) {
    const double env = r.max_grad_h + r.max_h;
    if (r.l2h > 1e-12 && std::isfinite(env) && env > 0.0) {
      ts.push_back(r.t);
      ys.push_back(std::log(env));
    }
  }
  if (ts.size() < 2) {
    out.note = "not applicable: envelope below the fit floor";
    return out;
  }
  const auto m = static_cast<double>(ts.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    ym += ys[i];
  }
  tm /= m;
  ym /= m;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tm) * (ts[i] - tm);
    sty += (ts[i] - tm) * (ys[i] - ym);
  }
  const double gamma = stt > 0.0 ? -sty / stt : 0.0;
  out.witness("gamma", gamma);
  if (!(gamma > 0.0)) {
    out.note = "not applicable: |grad H| + |H| envelope does not decay";
    return out;
  }
  double log_eps = -kInf;
  for (std::size_t i = 0; i < ts.size(); ++i) log_eps = std::max(log_eps, ys[i] + gamma * ts[i]);
  const double eps = std::exp(log_eps);
  out.witness("eps", eps);
  const double k0 = trace.curvature_bound;
  const double root0 = std::sqrt(rows.front().lambda1);
  out.witness("lambda1_0", rows.front().lambda1);

  double running_a = 0.0, worst = kInf, worst_t = 0.0, worst_bound = 0.0;
  int checked = 0;
  for (const TraceRow& r : rows) {
    running_a = std::max(running_a, r.max_a);
    if (!std::isfinite(r.lambda1)) continue;
    const double bound = root0 * std::exp(-(2.0 * running_a * eps + eps * eps) / (2.0 * gamma)) -
                         (k0 + running_a) * eps / gamma;
    const double mgn = (std::sqrt(std::max(r.lambda1, 0.0)) - bound) / root0;
    ++checked;
    if (mgn < worst) {
      worst = mgn;
      worst_t = r.t;
      worst_bound = bound;
    }
  }
  out.witness("rows_checked", checked);
  out.witness("worst_t", worst_t);
  out.witness("worst_bound_sqrt_lambda", worst_bound);
  out.margin = worst;
  out.pass = worst >= -kInequalityTolerance;
  return out;
}

CheckResult c0_from_l2_check(const GeometryCache& geo, double kappa_hat, double r) {
  const int n = geo.dim;
  const Integrals in = integrals(geo);
  const double eps = in.l2_h;
  if (eps > std::pow(r, n + 2)) {
    std::ostringstream msg;
    msg << "c0_from_l2_check: L2 norm " << eps << " exceeds r^(n+2) = " << std::pow(r, n + 2);
    throw ScaleViolation(msg.str());
  }
  CheckResult out;
  out.name = "c0_from_l2";
  const double rhs = (1.0 / std::sqrt(kappa_hat) + in.max_grad_h) * std::pow(eps, 1.0 / (n + 2));
  out.witness("max_h", in.max_h);
  out.witness("bound", rhs);
  out.witness("l2_h", eps);
  out.witness("max_grad_h", in.max_grad_h);
  out.witness("kappa_hat", kappa_hat);
  out.margin = relative(rhs - in.max_h, std::max(rhs, in.max_h));
  out.pass = out.margin >= -kInequalityTolerance;
  return out;
}

namespace {

// Q_il = g^{ka} R̄(e_k, e_i, e_a, e_l) per node; zero on flat spaces and curves.
std::vector<Eigen::Matrix2d> ambient_ricci_forms(const GeometryCache& geo, const Immersion& imm) {
  const int n = geo.dim;
  std::vector<Eigen::Matrix2d> out(geo.nodes.size(), Eigen::Matrix2d::Zero());
  const AmbientSpace& space = imm.space();
  if (n != 2 || space.kind() == AmbientKind::FlatTorus) return out;
  for (int p = 0; p < geo.topology.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    const MetricJet jet = space.metric_jet(imm.point(p), JetOrder::Curvature);
    Eigen::Matrix2d& q = out[static_cast<std::size_t>(p)];
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
          for (int a = 0; a < n; ++a) q(i, l) += ng.g_inv(k, a) * jet.riemann(ng.frame[k], ng.frame[i], ng.frame[a], ng.frame[l]);
  }
  return out;
}

CheckResult vector_field_check(const GeometryCache& geo, const std::vector<Eigen::Matrix2d>& ricci_forms,
                               const Eigen::MatrixXd& x) {
  const GridTopology& top = geo.topology;
  const int n = geo.dim;
  if (x.rows() != n || x.cols() != top.node_count())
    throw std::invalid_argument("vector_field_inequality_check: field shape does not match the grid");
  const double cell = top.cell_volume();

  double grad2 = 0.0, hh = 0.0, div2 = 0.0, hmean = 0.0, ric = 0.0;
  for (int p = 0; p < top.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    const double w = ng.sqrt_det * cell;
    Eigen::Matrix2d nab = Eigen::Matrix2d::Zero();  // nab(k, i) = ∇_k X^i
    for (int k = 0; k < n; ++k) {
      const auto plus = k == 0 ? top.shift(p, 1, 0) : top.shift(p, 0, 1);
      const auto minus = k == 0 ? top.shift(p, -1, 0) : top.shift(p, 0, -1);
      for (int i = 0; i < n; ++i) {
        double v = (x(i, plus.node) - x(i, minus.node)) / (2.0 * top.spacing(k));
        for (int j = 0; j < n; ++j) v += ng.gamma(i, k, j) * x(j, p);
        nab(k, i) = v;
      }
    }
    double g2 = 0.0, dv = 0.0;
    for (int k = 0; k < n; ++k) {
      dv += nab(k, k);
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) g2 += ng.g_inv(k, l) * ng.g(i, j) * nab(k, i) * nab(l, j);
    }
    double a = 0.0, b = 0.0, rc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        const double xx = x(i, p) * x(l, p);
        for (int k = 0; k < n; ++k)
          for (int m = 0; m < n; ++m)
            for (int aa = 0; aa < n; ++aa)
              for (int bb = 0; bb < n; ++bb)
                a += ng.g_inv(k, aa) * ng.g_inv(m, bb) * ng.h(l, k, m) * ng.h(i, aa, bb) * xx;
        for (int m = 0; m < n; ++m) b += ng.mean_curvature[m] * ng.h(m, i, l) * xx;
        rc += ricci_forms[static_cast<std::size_t>(p)](i, l) * xx;
      }
    grad2 += w * g2;
    div2 += w * dv * dv;
    hh += w * a;
    hmean += w * b;
    ric += w * rc;
  }
  CheckResult out;
  out.name = "vector_field_inequality";
  const double lhs = grad2 - hh;
  const double rhs = div2 - hmean - ric;
  out.witness("lhs", lhs);
  out.witness("rhs", rhs);
  out.witness("grad_sq", grad2);
  out.witness("div_sq", div2);
  out.witness("ricci", ric);
  out.margin = relative(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
  out.pass = out.margin >= -kInequalityTolerance;
  return out;
}

}  // namespace

CheckResult vector_field_inequality_check(const GeometryCache& geo, const Immersion& imm, const Eigen::MatrixXd& x) {
  return vector_field_check(geo, ambient_ricci_forms(geo, imm), x);
}

CheckResult vector_field_inequality_suite(const GeometryCache& geo, const Immersion& imm, int random_trials,
                                          unsigned seed) {
  const std::vector<Eigen::Matrix2d> forms = ambient_ricci_forms(geo, imm);
  CheckResult worst = vector_field_check(geo, forms, mean_curvature_field(geo));
  double worst_field = -1.0;  // -1 marks X = H
  const double margin_h = worst.margin;
  for (int trial = 0; trial < random_trials; ++trial) {
    CheckResult r = vector_field_check(geo, forms, random_tangent_field(geo.topology, seed + static_cast<unsigned>(trial)));
    if (r.margin < worst.margin) {
      worst = std::move(r);
      worst_field = trial;
    }
  }
  worst.witness("worst_field", worst_field);
  worst.witness("margin_mean_curvature_field", margin_h);
  worst.witness("random_trials", random_trials);
  return worst;
}

Eigen::MatrixXd mean_curvature_field(const GeometryCache& geo) {
  Eigen::MatrixXd x(geo.dim, geo.topology.node_count());
  for (int p = 0; p < geo.topology.node_count(); ++p)
    for (int i = 0; i < geo.dim; ++i) x(i, p) = geo.nodes[static_cast<std::size_t>(p)].mean_curvature[i];
  return x;
}

Eigen::MatrixXd random_tangent_field(const GridTopology& top, unsigned seed, int max_mode) {
  const int n = top.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, top.node_count());
  const int m1 = n == 2 ? max_mode : 0;
  for (int i = 0; i < n; ++i)
    for (int k0 = -max_mode; k0 <= max_mode; ++k0)
      for (int k1 = -m1; k1 <= m1; ++k1) {
        const double damp = 1.0 / (1.0 + k0 * k0 + k1 * k1);
        const double a = normal(rng) * damp, b = normal(rng) * damp;
        for (int p = 0; p < top.node_count(); ++p) {
          const double ph = 2.0 * M_PI * (k0 * top.param(p, 0) + (n == 2 ? k1 * top.param(p, 1) : 0.0));
          x(i, p) += a * std::cos(ph) + b * std::sin(ph);
        }
      }
  return x;
}

double short_time_doubling(const std::vector<TraceRow>& rows) {
  if (rows.empty()) return kInf;
  const double a2 = 2.0 * std::max(rows.front().max_a, 1e-12);
  const double h2 = 2.0 * std::max(rows.front().max_h, 1e-12);
  auto crossing = [](double t0, double v0, double t1, double v1, double level) {
    if (v1 == v0) return t1;
    return t0 + (level - v0) / (v1 - v0) * (t1 - t0);
  };
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const TraceRow& a = rows[i - 1];
    const TraceRow& b = rows[i];
    double t = kInf;
    if (b.max_a > a2) t = std::min(t, crossing(a.t, a.max_a, b.t, b.max_a, a2));
    if (b.max_h > h2) t = std::min(t, crossing(a.t, a.max_h, b.t, b.max_h, h2));
    if (t < kInf) return t;
  }
  return kInf;
}

CheckResult short_time_doubling_check(const std::vector<TraceRow>& rows) {
  CheckResult out;
  out.name = "short_time_doubling";
  const double t = short_time_doubling(rows);
  out.witness("doubling_time", t);
  out.margin = t;
  out.pass = t > 0.0;
  out.note = "margin is the doubling time itself";
  return out;
}

CheckResult volume_monotonicity_check(const std::vector<TraceRow>& rows) {
  CheckResult out;
  out.name = "volume_monotonicity";
  if (rows.empty()) return out;
  const double v0 = rows.front().vol;
  // The tolerance is per time step; rows are monitor_stride steps apart.
  // Without step counts (bare trace.csv) each interval counts as one step.
  double worst = 0.0;
  double worst_total = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double increase = rows[i].vol - rows[i - 1].vol;
    const long steps = std::max(1L, rows[i].step - rows[i - 1].step);
    worst = std::max(worst, increase / static_cast<double>(steps));
    worst_total = std::max(worst_total, increase);
  }
  out.witness("max_increase_per_step", worst);
  out.witness("max_increase_per_row", worst_total);
  out.witness("vol_0", v0);
  out.margin = -worst / v0;
  out.pass = worst <= 1e-10 * v0;
  out.note = "margin is -max per-step increase / Vol(0); tolerance 1e-10";
  return out;
}

CheckResult energy_monotonicity_check(const std::vector<TraceRow>& rows) {
  CheckResult out;
  out.name = "e_accum_monotonicity";
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) worst = std::max(worst, rows[i - 1].e_accum - rows[i].e_accum);
  out.witness("max_decrease", worst);
  out.margin = -worst;
  out.pass = worst <= 0.0;
  return out;
}

CheckResult volume_form_check(const FlowTrace& trace) {
  CheckResult out;
  out.name = "volume_form_bound";
  double worst = kInf, worst_t = 0.0;
  for (const TraceRow& r : trace.rows) {
    const double bound = std::exp(-(trace.dim + 1) * r.e_accum);
    const double mgn = (r.min_volume_ratio - bound) / bound;
    if (mgn < worst) {
      worst = mgn;
      worst_t = r.t;
    }
  }
  if (trace.rows.empty()) return out;
  out.witness("worst_t", worst_t);
  out.margin = worst;
  out.pass = worst >= -kInequalityTolerance;
  return out;
}

CheckResult defect_drift_check(const std::vector<TraceRow>& rows) {
  CheckResult out;
  out.name = "defect_drift";
  if (rows.empty()) return out;
  const double limit = 10.0 * rows.front().defect + 1e-12;
  out.witness("defect_initial", rows.front().defect);
  out.witness("defect_final", rows.back().defect);
  out.margin = (limit - rows.back().defect) / limit;
  out.pass = rows.back().defect <= limit;
  return out;
}

CheckResult eigenvalue_short_time_check(const std::vector<TraceRow>& rows, double t_window) {
  CheckResult out;
  out.name = "lambda1_short_time";
  out.note = "surrogate: lambda1(t) >= 0.9 lambda1(0) on the short-time window";
  if (rows.empty() || !std::isfinite(rows.front().lambda1)) {
    out.note = "not applicable: no lambda1 at t = 0";
    return out;
  }
  const double l0 = rows.front().lambda1;
  double worst = kInf;
  for (const TraceRow& r : rows) {
    if (r.t > t_window) break;
    if (std::isfinite(r.lambda1)) worst = std::min(worst, r.lambda1 / l0 - 0.9);
  }
  out.witness("lambda1_0", l0);
  out.witness("t_window", t_window);
  out.margin = worst;
  out.pass = worst >= 0.0;
  return out;
}

}  // namespace lmcf
