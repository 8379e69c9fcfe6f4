#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lmcf/geometry.hpp"
#include "lmcf/immersion.hpp"

namespace lmcf {

struct FlowConfig {
  double cfl = 0.5;            // c_cfl ∈ (0, 1]
  double t_max = 1.0;
  long max_steps = 10'000'000;
  int monitor_stride = 10;     // steps between diagnostic rows
  double defect_tol = 1e-2;    // DefectBlowup threshold on max |ω̄(e_0, e_1)|
  int snapshot_stride = 0;     // monitor rows between stored snapshots, 0 = none
  double conv_tol = 1e-6;      // max|H| below this counts towards convergence
  int conv_sustain = 10;       // consecutive monitor rows below conv_tol
  bool stop_on_convergence = true;
  int eigen_stride = 0;        // monitor rows between λ₁ evaluations, 0 = never
  int eigen_count = 4;
  int residual_stride = 0;     // monitor rows between evolution-equation residuals, 0 = never
  // Singularity guard: DegenerateMetric once min √det g falls below this
  // fraction of its initial value. 0 disables it.
  double collapse_ratio = 0.0;
  AngleOptions angle;

  /// Throws ValidationError listing every violated invariant.
  void validate() const;
};

/// One diagnostic row. The first eleven fields form the trace CSV; the rest
/// go to the auxiliary CSV. Quantities not evaluated at a row are NaN.
struct TraceRow {
  long step = 0;
  double t = 0.0;
  double vol = 0.0;
  double l2h = 0.0;
  double max_h = 0.0;
  double max_a = 0.0;
  double max_grad_a = 0.0;
  double lambda1 = 0.0;
  double defect = 0.0;
  double e_accum = 0.0;
  double theta_resid = 0.0;
  double h_resid = 0.0;

  double max_grad_h = 0.0;
  double min_volume_ratio = 1.0;  // min over nodes of √det g(t) / √det g(0)
  double closedness = 0.0;
  double holonomy = 0.0;          // max_a |∮ α_H|
  int lambda1_multiplicity = 0;
  double theta_scale = 0.0;       // max|Δθ| at the residual pair
  double h_scale = 0.0;           // max|Δα| at the residual pair
  double h_resid_ablated = 0.0;   // H-residual without the ambient curvature term
};

enum class FlowStatus { ReachedTMax, Converged, MaxSteps, Failed };
std::string to_string(FlowStatus status);

struct FlowTrace {
  int dim = 1;
  double scalar_curvature = 0.0;
  double curvature_bound = 0.0;  // K₀ of the ambient
  double dt_initial = 0.0;
  long steps = 0;
  FlowStatus status = FlowStatus::ReachedTMax;
  std::string error_kind;        // set when status == Failed
  std::string error_message;
  double failure_time = 0.0;
  std::vector<TraceRow> rows;
  std::vector<Immersion> snapshots;
  std::optional<Immersion> final_state;

  /// CSV with header t,vol,l2h,max_h,max_a,max_grad_a,lambda1,defect,e_accum,theta_resid,h_resid.
  void write_csv(std::ostream& out) const;
  /// Auxiliary per-row CSV (step, t and the remaining TraceRow fields).
  void write_aux_csv(std::ostream& out) const;
};

extern const char* const kTraceHeader;

/// Reads the rows of a trace CSV (main columns only; aux fields stay at defaults).
/// Throws ParseError on a malformed file.
std::vector<TraceRow> read_trace_csv(std::istream& in);
/// Merges an auxiliary CSV into rows read by read_trace_csv.
void read_aux_csv(std::istream& in, std::vector<TraceRow>& rows);

/// c_cfl · min_a(Δu_a² · min g_aa) / (2n (1 + max|A|²)).
double cfl_dt(const GeometryCache& geo, double c_cfl);
double cfl_dt(const Immersion& imm, double c_cfl);

/// Explicit midpoint step along H. Throws ChartExit, DegenerateMetric, or
/// DefectBlowup when the new state's defect exceeds `defect_tol`.
Immersion step(const Immersion& imm, double dt, double defect_tol = 1e-2);

/// Flows until t_max, max_steps, sustained convergence, or a flow error.
/// Errors are caught and recorded in the trace with status Failed.
FlowTrace run(const Immersion& initial, const FlowConfig& config);

struct Residual {
  double value = 0.0;  // max-norm of the residual
  double scale = 0.0;  // max-norm of the Laplacian term, for relative comparisons
};

/// Residual of ∂θ/∂t = Δθ + (R̄/2n)θ between two states δ = t₁ - t₀ apart,
/// with every right-hand-side term averaged over the pair and the free
/// additive constant chosen to minimize the max-norm. Throws NotClosed.
Residual residual_theta(const Immersion& before, const Immersion& after, const AngleOptions& opts = {});

/// Residual of the evolution equation of the mean curvature form in
/// coordinate components, ∂_t α_i = Δα_i + H^j h_jlm h_i^lm + H^j R̄(Je_i, e_l, Je_j, e^l) − H^j H^k h_ijk,
/// at fixed grid nodes. `curvature_term = false` drops the ambient term.
Residual residual_mean_curvature(const Immersion& before, const Immersion& after,
                                 bool curvature_term = true);

}  // namespace lmcf
