#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lmc/geometry.hpp"
#include "lmc/grid.hpp"
#include "lmc/source.hpp"

namespace lmc {

/// Discrete stationary problem
///   F[D^2 u] - f(x, Du) - c = 0  at interior nodes,
///   h(Du) = 0                    at boundary nodes,
///   mean of u over interior nodes = 0,
/// in the unknowns (u at active nodes, c). The boundary rows use the same
/// stencils as the flow.
class StationaryProblem {
 public:
  StationaryProblem(std::shared_ptr<const Lattice> lattice, SourceTerm source,
                    ConvexDomain target, Orientation orientation);

  const Lattice& lattice() const { return *lattice_; }
  const Orientation& orientation() const { return orientation_; }
  const BoundaryStencils& stencils() const { return stencils_; }
  /// Interior rows first, then boundary rows, then the normalization row.
  int rows() const { return unknowns(); }
  /// One column per active node (in Lattice::active_nodes order) plus c.
  int unknowns() const { return static_cast<int>(columns_.size()) + 1; }
  int column(int node) const { return column_of_[static_cast<std::size_t>(node)]; }

  Eigen::VectorXd residual(const Field& u, double c) const;
  Eigen::MatrixXd jacobian(const Field& u, double c) const;

  /// Unknown vector <-> (field, c).
  Eigen::VectorXd pack(const Field& u, double c) const;
  void unpack(const Eigen::VectorXd& z, Field& u, double& c) const;

 private:
  std::shared_ptr<const Lattice> lattice_;
  SourceTerm source_;
  ConvexDomain target_;
  Orientation orientation_;
  BoundaryStencils stencils_;
  std::vector<int> columns_;    // column -> node
  std::vector<int> column_of_;  // node -> column or -1
};

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;  // residual infinity norm
  int max_halvings = 20;
  double eps_convex = 1e-6;
  /// Boundary directions; derived from u_init when absent.
  std::optional<Orientation> orientation;
};

struct NewtonIteration {
  int iteration = 0;
  double residual_inf = 0.0;
  double residual_2 = 0.0;
  double step_scale = 0.0;  // accepted damping factor, 0 for the initial row
  double c = 0.0;
};

struct NewtonResult {
  Field u;
  double c = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual_inf = 0.0;
  std::vector<NewtonIteration> history;
  Orientation orientation;
};

/// Damped Newton on (u, c) from u_init with c started at the mean of F - f.
/// Throws Error("stationary", "inadmissible-initial-data") when u_init is not
/// convex or its boundary residual exceeds 10 spacing,
/// Error("stationary", "newton-stagnated") when backtracking is exhausted and
/// Error("stationary", "convexity-lost") when every damped step leaves the
/// convex cone.
NewtonResult newton_solve(const Field& u_init, const SourceTerm& source,
                          const ConvexDomain& target, const NewtonOptions& options = {});

}  // namespace lmc
