#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lmc/config.hpp"

namespace lmc {

/// Each command prints a short report to `out`, writes its artifacts under
/// config.output.directory and returns the process exit status. Module
/// failures propagate as lmc::Error.

/// Flow to translator: profile.csv, diagnostics.csv, summary.txt and, when
/// enabled, u.pgm / udot.pgm / lam_min.pgm. Non-convergence throws
/// Error("flow", "did-not-converge") after the artifacts are written.
int run_command(const RunConfig& config, std::ostream& out);

/// Newton oracle from the configured initial data: profile.csv,
/// newton_history.csv, summary.txt.
int solve_command(const RunConfig& config, std::ostream& out);

/// Admissibility report (check.txt). Returns 0 when every condition holds;
/// otherwise throws Error("source", "inadmissible").
int check_command(const RunConfig& config, std::ostream& out);

/// Conjugate of a saved field (conjugate.csv on the target lattice) and the
/// duality report (duality.txt).
int legendre_command(const RunConfig& config, const std::string& field_path,
                     std::optional<double> c_inf, std::ostream& out);

struct RefineLevel {
  int resolution = 0;
  double c_inf = 0.0;
  bool converged = false;
  std::optional<double> error;  // against the exact constant when f = 0
};

struct RefineStudy {
  std::vector<RefineLevel> levels;
  std::optional<double> reference;
  std::optional<double> observed_order;        // log2(|c1 - c2| / |c2 - c3|)
  std::optional<double> observed_error_order;  // log2(|e2| / |e3|)
};

/// Runs the flow at each resolution. The reference constant F(A) is known
/// when f = 0 and the initial map is the automatic quadratic one.
RefineStudy refine_study(const RunConfig& config, const std::vector<int>& resolutions);

/// refine_study at 33, 65, 129: refine.csv and summary.txt.
int refine_command(const RunConfig& config, std::ostream& out);

}  // namespace lmc
