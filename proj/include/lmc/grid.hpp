#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lmc/geometry.hpp"
#include "lmc/types.hpp"

namespace lmc {

enum class NodeKind : std::uint8_t { exterior, interior, boundary };

/// Per-axis upwind direction (+1 or -1) used by a boundary node's one-sided
/// differences. Unused trailing entries are 0.
using AxisDirections = std::array<int, 2>;

struct BoundaryNode {
  int index = -1;                       // lattice index
  Vec projection;                       // projection onto the domain boundary
  Vec normal;                           // inward normal of omega there
  AxisDirections default_dir{0, 0};     // geometric inward choice
  std::array<std::array<bool, 2>, 2> available{};  // [axis][dir < 0 ? 0 : 1]

  bool can_use(int axis, int dir) const { return available[axis][dir < 0 ? 0 : 1]; }
};

/// One entry per boundary node, in lattice boundary order.
using Orientation = std::vector<AxisDirections>;

/// Uniform lattice over the (square-padded) bounding box of a domain.
/// Nodes with h(x) >= -spacing/2 are active; active nodes whose full
/// 3^n-point neighbourhood is active are interior, the rest are boundary.
class Lattice {
 public:
  Lattice(const ConvexDomain& domain, int resolution);

  int dim() const { return dim_; }
  int resolution() const { return resolution_; }
  double spacing() const { return spacing_; }
  const Vec& origin() const { return origin_; }
  const ConvexDomain& domain() const { return domain_; }
  int size() const { return static_cast<int>(kinds_.size()); }

  NodeKind kind(int idx) const { return kinds_[static_cast<std::size_t>(idx)]; }
  bool active(int idx) const { return idx >= 0 && kind(idx) != NodeKind::exterior; }
  int stride(int axis) const { return axis == 0 ? 1 : resolution_; }
  std::array<int, 2> coords(int idx) const {
    return {idx % resolution_, dim_ == 2 ? idx / resolution_ : 0};
  }
  int index(int i, int j = 0) const { return i + j * resolution_; }
  /// Lattice index of the node `steps` away along `axis`, or -1 outside the box.
  int neighbor(int idx, int axis, int steps) const;
  Vec position(int idx) const;

  const std::vector<int>& active_nodes() const { return active_; }
  const std::vector<int>& interior_nodes() const { return interior_; }
  const std::vector<BoundaryNode>& boundary_nodes() const { return boundary_; }
  /// Slot of idx in boundary_nodes(), or -1.
  int boundary_slot(int idx) const { return boundary_slot_[static_cast<std::size_t>(idx)]; }
  /// For every boundary node, the closest interior node (lattice index).
  const std::vector<int>& nearest_interior() const { return nearest_interior_; }

  Orientation default_orientation() const;

 private:
  ConvexDomain domain_;
  int dim_ = 0;
  int resolution_ = 0;
  double spacing_ = 0.0;
  Vec origin_;
  std::vector<NodeKind> kinds_;
  std::vector<int> active_;
  std::vector<int> interior_;
  std::vector<BoundaryNode> boundary_;
  std::vector<int> boundary_slot_;
  std::vector<int> nearest_interior_;
};

/// Throws Error("grid", "coarse-resolution") when some boundary node lacks
/// two consecutive active neighbours along an axis.
std::shared_ptr<const Lattice> build_lattice(const ConvexDomain& omega,
                                             int resolution);

/// Scalar values on a lattice. Storage spans the whole box; entries at
/// exterior nodes are kept at zero and never read.
class Field {
 public:
  explicit Field(std::shared_ptr<const Lattice> lattice);

  const Lattice& lattice() const { return *lattice_; }
  const std::shared_ptr<const Lattice>& lattice_ptr() const { return lattice_; }
  double operator[](int idx) const { return values_[static_cast<std::size_t>(idx)]; }
  double& operator[](int idx) { return values_[static_cast<std::size_t>(idx)]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double min_active() const;
  double max_active() const;
  bool all_finite() const;
  /// Adds c at every active node.
  void shift(double c);

 private:
  std::shared_ptr<const Lattice> lattice_;
  std::vector<double> values_;
};

/// Samples a function at every active node.
template <class Fn>
Field sample_field(std::shared_ptr<const Lattice> lattice, Fn&& fn) {
  Field f(lattice);
  for (int idx : lattice->active_nodes()) f[idx] = fn(lattice->position(idx));
  return f;
}

/// Central differences at interior nodes; one-sided second-order
/// differences (-3u0 + 4u1 - u2)/(2 spacing) along the default orientation at
/// boundary nodes.
Vec gradient(const Field& u, int idx);
/// One-sided gradient at boundary slot `slot` with explicit directions.
Vec one_sided_gradient(const Field& u, int slot, const AxisDirections& dir);
/// 3^n-point central Hessian; interior nodes only.
Mat hessian(const Field& u, int idx);

/// Linear estimate of Du at the projection x* of a boundary node x_b onto
/// the domain boundary:
///
///   Du(x*) ~ G(x_b) + H(x_i) (x* - x_b),
///
/// G the one-sided gradient, H the central Hessian at the nearest interior
/// node x_i. Exact for quadratics. Stored as sum_j weights[j] * u[nodes[j]].
struct BoundaryStencil {
  static constexpr int kMaxNodes = 16;
  int count = 0;
  int self = -1;  // position of the boundary node itself in `nodes`
  std::array<int, kMaxNodes> nodes{};
  std::array<std::array<double, 2>, kMaxNodes> weights{};

  void add(int node, int axis, double w);
};

using BoundaryStencils = std::vector<BoundaryStencil>;

BoundaryStencil boundary_stencil(const Lattice& lattice, int slot,
                                 const AxisDirections& dir);
BoundaryStencils boundary_stencils(const Lattice& lattice,
                                   const Orientation& orient);

/// Du at the projection point, evaluated through the stencil.
Vec boundary_gradient(const Field& u, const BoundaryStencil& stencil);

/// Solves h(Du(x*)) = 0 for the value at the stencil's boundary node, all
/// other values frozen. Safeguarded Newton from the current value, to
/// |h| <= 1e-12 max(1, |h_start|) within 50 iterations.
/// Throws Error("grid", "obliqueness-breakdown") when the scalar derivative
/// drops below 1e-10 or Newton fails.
double solve_boundary_node(const Field& u, const BoundaryStencil& stencil,
                           const ConvexDomain& target);

struct SweepStats {
  int passes = 0;
  double last_change = 0.0;
};

enum class SweepOrder { forward, reverse };

/// Jacobi sweeps of solve_boundary_node over all boundary nodes until the
/// boundary values stop changing. Every pass reads a frozen snapshot, so the
/// result does not depend on the processing order.
SweepStats boundary_sweep(Field& u, const BoundaryStencils& stencils,
                          const ConvexDomain& target,
                          SweepOrder order = SweepOrder::forward);

/// Directions from the sign of beta = Dh(Du): axis k follows sign(beta_k)
/// when |beta_k| > 0.05 |beta|_inf and that side is available, otherwise the
/// lattice default.
Orientation orientation_from_state(const Field& u, const BoundaryStencils& current,
                                   const ConvexDomain& target);

/// h(Du(x*)) at a boundary node, and <beta, nu> with beta = Dh(Du(x*)) and nu
/// the inward normal at x*.
double boundary_residual(const Field& u, int slot, const BoundaryStencil& stencil,
                         const ConvexDomain& target);
double obliqueness(const Field& u, int slot, const BoundaryStencil& stencil,
                   const ConvexDomain& target);

/// Multilinear interpolation of per-node values. Every corner of the cell
/// containing `point` must be active; otherwise throws
/// Error("grid", "out-of-hull").
double interpolate(const Lattice& lattice, std::span<const double> values,
                   const Vec& point);
double interpolate(const Field& u, const Vec& point);

/// True when all corners of the cell containing `point` are interior nodes.
bool cell_is_interior(const Lattice& lattice, const Vec& point);

}  // namespace lmc
