#include "lmcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "lmcf/errors.hpp"
#include "lmcf/laplacian.hpp"
#include "lmcf/spectral.hpp"

namespace lmcf {

const char* const kTraceHeader = "t,vol,l2h,max_h,max_a,max_grad_a,lambda1,defect,e_accum,theta_resid,h_resid";

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kAuxHeader =
    "step,t,max_grad_h,min_volume_ratio,closedness,holonomy,lambda1_multiplicity,theta_scale,h_scale,"
    "h_resid_ablated";

Eigen::MatrixXd velocity(const GeometryCache& geo, int real_dim) {
  Eigen::MatrixXd v(real_dim, static_cast<Eigen::Index>(geo.nodes.size()));
  for (std::size_t p = 0; p < geo.nodes.size(); ++p) v.col(static_cast<Eigen::Index>(p)) = geo.nodes[p].mean_curvature_vector;
  return v;
}

// Midpoint update from a state whose geometry is already known.
Immersion advance(const Immersion& imm, const GeometryCache& geo, double dt) {
  const int d = imm.space().real_dim();
  const Immersion mid = imm.with_coords(imm.coords() + 0.5 * dt * velocity(geo, d), imm.time() + 0.5 * dt);
  const GeometryCache geo_mid = geometry(mid);
  return imm.with_coords(imm.coords() + dt * velocity(geo_mid, d), imm.time() + dt);
}

void check_defect(const GeometryCache& geo, double defect_tol, double t) {
  const double defect = geo.max_defect();
  if (defect > defect_tol) {
    std::ostringstream msg;
    msg << std::setprecision(6) << "Lagrangian defect " << defect << " exceeds " << defect_tol << " at t = " << t;
    throw DefectBlowup(msg.str());
  }
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Norm of a covector with the inverse metric.
double covector_norm(const NodeGeometry& ng, int n, const Eigen::Vector2d& w) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += ng.g_inv(i, j) * w[i] * w[j];
  return std::sqrt(std::max(s, 0.0));
}

// Right-hand side of the α evolution without the rough Laplacian, split into
// the pure second-fundamental-form part and the ambient curvature part.
void alpha_reaction(const Immersion& imm, const GeometryCache& geo, std::vector<Eigen::Vector2d>& shape,
                    std::vector<Eigen::Vector2d>& ambient) {
  const int n = geo.dim;
  const AmbientSpace& space = imm.space();
  const bool flat = space.kind() == AmbientKind::FlatTorus;
  shape.assign(geo.nodes.size(), Eigen::Vector2d::Zero());
  ambient.assign(geo.nodes.size(), Eigen::Vector2d::Zero());
  for (int p = 0; p < imm.node_count(); ++p) {
    const NodeGeometry& ng = geo.nodes[static_cast<std::size_t>(p)];
    const Eigen::Vector2d& hv = ng.mean_curvature;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m)
            for (int pp = 0; pp < n; ++pp)
              for (int q = 0; q < n; ++q)
                s += hv[j] * ng.h(j, l, m) * ng.h(i, pp, q) * ng.g_inv(l, pp) * ng.g_inv(m, q);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s -= hv[j] * hv[k] * ng.h(i, j, k);
      shape[static_cast<std::size_t>(p)][i] = s;
    }
    if (flat) continue;
    const MetricJet jet = space.metric_jet(imm.point(p), JetOrder::Curvature);
    std::array<AmbVec, 2> je;
    for (int i = 0; i < n; ++i) je[i] = jet.J * ng.frame[i];
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int pp = 0; pp < n; ++pp)
            s += hv[j] * ng.g_inv(l, pp) * jet.riemann(je[i], ng.frame[l], je[j], ng.frame[pp]);
      ambient[static_cast<std::size_t>(p)][i] = s;
    }
  }
}

}  // namespace

void FlowConfig::validate() const {
  std::vector<std::string> errors;
  if (!(cfl > 0.0 && cfl <= 1.0)) errors.push_back("cfl must lie in (0, 1]");
  if (!(t_max > 0.0)) errors.push_back("t_max must be positive");
  if (max_steps < 1) errors.push_back("max_steps must be at least 1");
  if (monitor_stride < 1) errors.push_back("monitor_stride must be at least 1");
  if (!(defect_tol > 0.0)) errors.push_back("defect_tol must be positive");
  if (snapshot_stride < 0) errors.push_back("snapshot_stride must be non-negative");
  if (!(conv_tol > 0.0)) errors.push_back("conv_tol must be positive");
  if (conv_sustain < 1) errors.push_back("conv_sustain must be at least 1");
  if (eigen_stride < 0) errors.push_back("eigen_stride must be non-negative");
  if (eigen_count < 1 || eigen_count > 12) errors.push_back("eigen_count must lie in [1, 12]");
  if (residual_stride < 0) errors.push_back("residual_stride must be non-negative");
  if (!(collapse_ratio >= 0.0 && collapse_ratio < 1.0)) errors.push_back("collapse_ratio must lie in [0, 1)");
  if (errors.empty()) return;
  std::string msg = "invalid flow configuration:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw ValidationError(msg);
}

std::string to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::ReachedTMax: return "reached_t_max";
    case FlowStatus::Converged: return "converged";
    case FlowStatus::MaxSteps: return "max_steps";
    case FlowStatus::Failed: return "failed";
  }
  return "unknown";
}

void FlowTrace::write_csv(std::ostream& out) const {
  out << kTraceHeader << '\n' << std::setprecision(17);
  for (const TraceRow& r : rows) {
    out << r.t << ',' << r.vol << ',' << r.l2h << ',' << r.max_h << ',' << r.max_a << ',' << r.max_grad_a << ','
        << r.lambda1 << ',' << r.defect << ',' << r.e_accum << ',' << r.theta_resid << ',' << r.h_resid << '\n';
  }
}

void FlowTrace::write_aux_csv(std::ostream& out) const {
  out << kAuxHeader << '\n' << std::setprecision(17);
  for (const TraceRow& r : rows) {
    out << r.step << ',' << r.t << ',' << r.max_grad_h << ',' << r.min_volume_ratio << ',' << r.closedness << ','
        << r.holonomy << ',' << r.lambda1_multiplicity << ',' << r.theta_scale << ',' << r.h_scale << ','
        << r.h_resid_ablated << '\n';
  }
}

namespace {

std::vector<double> parse_fields(const std::string& line, std::size_t expected, int line_no) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
    }
  }
  if (out.size() != expected)
    throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(expected) + " fields, got " +
                     std::to_string(out.size()));
  return out;
}

}  // namespace

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw ParseError("line 1: trace header mismatch");
  std::vector<TraceRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<double> f = parse_fields(line, 11, line_no);
    TraceRow r;
    r.t = f[0];
    r.vol = f[1];
    r.l2h = f[2];
    r.max_h = f[3];
    r.max_a = f[4];
    r.max_grad_a = f[5];
    r.lambda1 = f[6];
    r.defect = f[7];
    r.e_accum = f[8];
    r.theta_resid = f[9];
    r.h_resid = f[10];
    r.max_grad_h = kNaN;
    r.min_volume_ratio = kNaN;
    r.theta_scale = kNaN;
    r.h_scale = kNaN;
    r.h_resid_ablated = kNaN;
    rows.push_back(r);
  }
  return rows;
}

void read_aux_csv(std::istream& in, std::vector<TraceRow>& rows) {
  std::string line;
  if (!std::getline(in, line) || line != kAuxHeader) throw ParseError("line 1: auxiliary trace header mismatch");
  std::size_t i = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (i >= rows.size()) throw ParseError("line " + std::to_string(line_no) + ": more auxiliary rows than trace rows");
    const std::vector<double> f = parse_fields(line, 10, line_no);
    TraceRow& r = rows[i++];
    r.step = static_cast<long>(f[0]);
    r.max_grad_h = f[2];
    r.min_volume_ratio = f[3];
    r.closedness = f[4];
    r.holonomy = f[5];
    r.lambda1_multiplicity = static_cast<int>(f[6]);
    r.theta_scale = f[7];
    r.h_scale = f[8];
    r.h_resid_ablated = f[9];
  }
  if (i != rows.size()) throw ParseError("auxiliary trace has fewer rows than the trace");
}

double cfl_dt(const GeometryCache& geo, double c_cfl) {
  const int n = geo.dim;
  double min_len = std::numeric_limits<double>::infinity();
  double max_a2 = 0.0;
  for (const NodeGeometry& ng : geo.nodes) {
    for (int a = 0; a < n; ++a) {
      const double du = geo.topology.spacing(a);
      min_len = std::min(min_len, du * du * ng.g(a, a));
    }
    max_a2 = std::max(max_a2, ng.norm_a2);
  }
  return c_cfl * min_len / (2.0 * n * (1.0 + max_a2));
}

double cfl_dt(const Immersion& imm, double c_cfl) { return cfl_dt(geometry(imm), c_cfl); }

Immersion step(const Immersion& imm, double dt, double defect_tol) {
  Immersion next = advance(imm, geometry(imm), dt);
  check_defect(geometry(next), defect_tol, next.time());
  return next;
}

Residual residual_theta(const Immersion& before, const Immersion& after, const AngleOptions& opts) {
  const double delta = after.time() - before.time();
  if (!(delta > 0.0)) throw std::invalid_argument("residual_theta: states must be ordered in time");
  const GeometryCache g0 = geometry(before);
  const GeometryCache g1 = geometry(after);
  const AnglePotential a0 = angle_potential(before, g0, opts);
  const AnglePotential a1 = angle_potential(after, g1, opts);
  if (!a0.exact || !a1.exact) throw NotClosed("residual_theta: mean curvature form is not exact");
  const Eigen::VectorXd lap0 = DiscreteLaplacian(g0).apply(a0.theta);
  const Eigen::VectorXd lap1 = DiscreteLaplacian(g1).apply(a1.theta);
  const double c = before.space().scalar_curvature() / (2.0 * before.dim());
  const Eigen::VectorXd lap = 0.5 * (lap0 + lap1);
  Eigen::VectorXd r = (a1.theta - a0.theta) / delta - lap - c * 0.5 * (a0.theta + a1.theta);
  // Optimal additive constant for the max-norm is the midrange.
  r.array() -= 0.5 * (r.maxCoeff() + r.minCoeff());
  return {max_abs(r), max_abs(lap)};
}

Residual residual_mean_curvature(const Immersion& before, const Immersion& after, bool curvature_term) {
  const double delta = after.time() - before.time();
  if (!(delta > 0.0)) throw std::invalid_argument("residual_mean_curvature: states must be ordered in time");
  const int n = before.dim();
  const GeometryCache g0 = geometry(before);
  const GeometryCache g1 = geometry(after);
  const auto lap0 = rough_laplacian_alpha(g0);
  const auto lap1 = rough_laplacian_alpha(g1);
  std::vector<Eigen::Vector2d> s0, s1, r0, r1;
  alpha_reaction(before, g0, s0, r0);
  alpha_reaction(after, g1, s1, r1);
  Residual out;
  for (std::size_t p = 0; p < g0.nodes.size(); ++p) {
    const Eigen::Vector2d dt_alpha = (g1.nodes[p].alpha - g0.nodes[p].alpha) / delta;
    const Eigen::Vector2d lap = 0.5 * (lap0[p] + lap1[p]);
    Eigen::Vector2d rhs = lap + 0.5 * (s0[p] + s1[p]);
    if (curvature_term) rhs += 0.5 * (r0[p] + r1[p]);
    out.value = std::max(out.value, covector_norm(g0.nodes[p], n, dt_alpha - rhs));
    out.scale = std::max(out.scale, covector_norm(g0.nodes[p], n, lap));
  }
  return out;
}

FlowTrace run(const Immersion& initial, const FlowConfig& config) {
  config.validate();
  FlowTrace trace;
  trace.dim = initial.dim();
  trace.scalar_curvature = initial.space().scalar_curvature();
  trace.curvature_bound = initial.space().curvature_bounds()[0];

  Immersion cur = initial;
  GeometryCache geo;
  std::vector<double> sqrt_det0;
  double min_sqrt_det0 = 0.0;
  double prev_rate = 0.0;
  int below = 0;
  long step_count = 0;
  std::optional<Immersion> prev;  // state one step before `cur`
  double attempted = initial.time();

  auto record = [&](const GeometryCache& g) {
    TraceRow row;
    row.step = step_count;
    row.t = cur.time();
    const Integrals in = integrals(g);
    row.vol = in.volume;
    row.l2h = in.l2_h;
    row.max_h = in.max_h;
    row.max_a = in.max_a;
    row.max_grad_a = in.max_grad_a;
    row.max_grad_h = in.max_grad_h;
    row.defect = g.max_defect();
    double rate = 0.0;
    row.min_volume_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < g.nodes.size(); ++p) {
      const NodeGeometry& ng = g.nodes[p];
      const double a = std::sqrt(std::max(ng.norm_a2, 0.0));
      const double h = std::sqrt(std::max(ng.norm_h2, 0.0));
      rate = std::max(rate, a * h + h * h);
      row.min_volume_ratio = std::min(row.min_volume_ratio, ng.sqrt_det / sqrt_det0[p]);
    }
    if (trace.rows.empty()) {
      row.e_accum = 0.0;
    } else {
      const TraceRow& last = trace.rows.back();
      row.e_accum = last.e_accum + 0.5 * (prev_rate + rate) * (row.t - last.t);
    }
    prev_rate = rate;

    const long index = static_cast<long>(trace.rows.size());
    row.closedness = closedness_residual(g);
    try {
      const AnglePotential ap = angle_potential(cur, g, config.angle);
      row.holonomy = max_abs(ap.holonomy);
    } catch (const NotClosed&) {
      row.holonomy = kNaN;
    }

    row.lambda1 = kNaN;
    if (config.eigen_stride > 0 && index % config.eigen_stride == 0) {
      try {
        const Spectrum spec = lowest_eigenpairs(g, config.eigen_count);
        row.lambda1 = spec.lambda1();
        row.lambda1_multiplicity = static_cast<int>(spec.first_cluster().size());
      } catch (const NoConvergence&) {
      }
    }

    row.theta_resid = kNaN;
    row.h_resid = kNaN;
    row.theta_scale = kNaN;
    row.h_scale = kNaN;
    row.h_resid_ablated = kNaN;
    if (config.residual_stride > 0 && prev && index % config.residual_stride == 0) {
      try {
        const Residual rt = residual_theta(*prev, cur, config.angle);
        row.theta_resid = rt.value;
        row.theta_scale = rt.scale;
      } catch (const NotClosed&) {
      }
      const Residual rh = residual_mean_curvature(*prev, cur, true);
      row.h_resid = rh.value;
      row.h_scale = rh.scale;
      row.h_resid_ablated = residual_mean_curvature(*prev, cur, false).value;
    }

    if (config.snapshot_stride > 0 && index % config.snapshot_stride == 0) trace.snapshots.push_back(cur);
    below = row.max_h < config.conv_tol ? below + 1 : 0;
    trace.rows.push_back(row);
  };

  try {
    geo = geometry(cur);
    sqrt_det0.resize(geo.nodes.size());
    min_sqrt_det0 = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < geo.nodes.size(); ++p) {
      sqrt_det0[p] = geo.nodes[p].sqrt_det;
      min_sqrt_det0 = std::min(min_sqrt_det0, sqrt_det0[p]);
    }
    trace.dt_initial = cfl_dt(geo, config.cfl);
    record(geo);
    const double t_end = initial.time() + config.t_max;
    bool recorded = true;
    while (true) {
      if (below >= config.conv_sustain && config.stop_on_convergence) {
        trace.status = FlowStatus::Converged;
        break;
      }
      if (cur.time() >= t_end * (1.0 - 1e-14)) {
        trace.status = FlowStatus::ReachedTMax;
        break;
      }
      if (step_count >= config.max_steps) {
        trace.status = FlowStatus::MaxSteps;
        break;
      }
      const double dt = std::min(cfl_dt(geo, config.cfl), t_end - cur.time());
      attempted = cur.time() + dt;
      Immersion next = advance(cur, geo, dt);
      GeometryCache next_geo = geometry(next);
      check_defect(next_geo, config.defect_tol, next.time());
      if (config.collapse_ratio > 0.0) {
        double min_sqrt_det = std::numeric_limits<double>::infinity();
        for (const NodeGeometry& ng : next_geo.nodes) min_sqrt_det = std::min(min_sqrt_det, ng.sqrt_det);
        if (min_sqrt_det < config.collapse_ratio * min_sqrt_det0) {
          std::ostringstream msg;
          msg << std::setprecision(6) << "induced volume form collapsed below " << config.collapse_ratio
              << " of its initial minimum at t = " << next.time();
          throw DegenerateMetric(msg.str());
        }
      }
      prev = std::move(cur);
      cur = std::move(next);
      geo = std::move(next_geo);
      ++step_count;
      recorded = false;
      if (step_count % config.monitor_stride == 0) {
        record(geo);
        recorded = true;
      }
    }
    if (!recorded) record(geo);
  } catch (const Error& e) {
    trace.status = FlowStatus::Failed;
    trace.error_kind = e.kind();
    trace.error_message = e.what();
    trace.failure_time = attempted;
  }
  trace.steps = step_count;
  trace.final_state = cur;
  return trace;
}

}  // namespace lmcf
