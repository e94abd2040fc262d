#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmc/arctan_operator.hpp"
#include "lmc/error.hpp"
#include "lmc/geometry.hpp"
#include "lmc/grid.hpp"
#include "lmc/source.hpp"

namespace lmc {

struct FlowConfig {
  double cfl = 0.5;
  double t_max = 50.0;
  /// <= 0 selects 1e-8 * max(1, |udot_mean|).
  double tol_osc = 0.0;
  int sample_every = 50;
  double eps_convex = 1e-6;
  /// Overrides the p-oscillation of f as the structure-constant delta.
  std::optional<double> delta;
  bool abort_on_violation = true;
};

/// One diagnostics sample; u_dot statistics are over interior nodes.
struct DiagnosticSample {
  double t = 0.0;
  double dt = 0.0;
  double udot_min = 0.0;
  double udot_max = 0.0;
  double udot_mean = 0.0;
  double udot_osc = 0.0;
  double lam_min = 0.0;
  double lam_max = 0.0;
  double obliq_min = 0.0;
  double bc_residual_max = 0.0;
  double image_violation = 0.0;
  double sum_f_min = 0.0;
  double sum_f_max = 0.0;
  double sum_f_lam2_min = 0.0;
  double sum_f_lam2_max = 0.0;
  /// Largest |sum_f + sum_f_lam2 - n| over interior nodes.
  double structure_identity_error = 0.0;
  double mean_u = 0.0;
};

/// Reference bounds for the runtime monitors, fixed from u0 at t = 0.
struct MonitorBounds {
  double udot_lower = 0.0;  // min F[D^2 u0] - sup f
  double udot_upper = 0.0;  // max F[D^2 u0] - inf f
  double lambda1 = 0.0;     // 0 when delta is not admissible
  int n = 0;
  double slack = 0.0;       // 10 * spacing
};

/// Violated monitor names: "udot lower", "udot upper", "sumF lower",
/// "sumF upper", "sumF_lam2 lower", "sumF_lam2 upper", "obliqueness".
std::vector<std::string> check_monitors(const DiagnosticSample& sample,
                                        const MonitorBounds& bounds);

struct FlowState {
  Field u;
  double t = 0.0;
  long step_count = 0;
  double dt = 0.0;
  Orientation orient;
  BoundaryStencils stencils;  // built from `orient`

  void set_orientation(Orientation o);
};

struct TranslatorResult {
  Field profile;   // u - min(u) at the final time
  Field udot;      // final u_dot (boundary nodes copy the nearest interior)
  double c_inf = 0.0;
  double c_slope = 0.0;  // least-squares slope of mean(u) over the last samples
  double t_final = 0.0;
  long steps = 0;
  bool converged = false;
  double translator_residual = 0.0;
  double tol_osc = 0.0;
  DiagnosticSample final_sample;
  std::vector<DiagnosticSample> history;
  MonitorBounds bounds;
  std::optional<StructureConstants> structure;
  Orientation orientation;
};

/// Thrown when a run aborts; carries the diagnostics recorded so far.
class FlowError : public Error {
 public:
  FlowError(const std::string& code, const std::string& detail,
            std::vector<DiagnosticSample> history)
      : Error("flow", code, detail), history_(std::move(history)) {}
  const std::vector<DiagnosticSample>& history() const { return history_; }

 private:
  std::vector<DiagnosticSample> history_;
};

/// Explicit forward-Euler discretization of
///   u_t = F[D^2 u] - f(x, Du) in omega,  h(Du) = 0 on the boundary,
/// with the boundary condition re-imposed after every step.
class FlowSolver {
 public:
  FlowSolver(std::shared_ptr<const Lattice> lattice, SourceTerm source,
             ConvexDomain target, FlowConfig config = {});

  const Lattice& lattice() const { return *lattice_; }
  const FlowConfig& config() const { return config_; }
  const SourceTerm& source() const { return source_; }
  const ConvexDomain& target() const { return target_; }
  /// cfl * spacing^2 / (2n)
  double stable_dt() const;

  /// u0 with orientation chosen from its beta and boundary values solved.
  FlowState initial_state(const Field& u0) const;
  /// F[D^2 u] - f(x, Du) at interior nodes, copied to boundary nodes from
  /// the nearest interior node. Throws FlowError("state-corrupted") on NaN.
  Field udot_field(const FlowState& state) const;
  /// u += dt * u_dot on the interior, then a boundary sweep (with at most
  /// one re-orientation).
  void step(FlowState& state) const;
  DiagnosticSample sample(const FlowState& state) const;

  /// Bounds for check_monitors derived from u0 and the source.
  MonitorBounds monitor_bounds(const Field& u0,
                               std::optional<StructureConstants>* structure = nullptr) const;

  TranslatorResult run_to_translator(const Field& u0) const;

 private:
  struct InteriorStats {
    double udot_min, udot_max, udot_sum, lam_min, lam_max;
  };
  InteriorStats evaluate(const Field& u, std::vector<double>& udot) const;
  void advance(FlowState& state, const std::vector<double>& udot) const;
  DiagnosticSample make_sample(const FlowState& state,
                               const std::vector<double>& udot,
                               const InteriorStats& stats) const;

  std::shared_ptr<const Lattice> lattice_;
  SourceTerm source_;
  ConvexDomain target_;
  FlowConfig config_;
  // Per interior node: position and the x-only part of the source.
  std::vector<int> interior_;
  std::vector<double> fx_part_;
  std::vector<Vec> positions_;
};

/// (max, min) of F[D^2 u] over interior nodes.
HessianRange hessian_range(const Field& u);

/// Max over boundary nodes of |h(Du)| using the lattice default orientation.
/// Du is the boundary-stencil estimate at the projection point.
double max_boundary_residual(const Field& u, const ConvexDomain& target);

}  // namespace lmc
