#pragma once

#include <memory>
#include <optional>

#include "lmc/grid.hpp"
#include "lmc/source.hpp"

namespace lmc {

/// Discrete convex conjugate
///   u~(p) = max over active source nodes x of (x . p - u(x))
/// at every active node p of `target_lattice`.
Field legendre_transform(const Field& u, std::shared_ptr<const Lattice> target_lattice);

struct DualityReport {
  int checked_points = 0;              // interior source nodes with Du(x) well inside the target hull
  double gradient_inverse_error = 0.0;  // max |Du~(Du(x)) - x|
  double hessian_product_error = 0.0;   // max ||D^2u~(Du(x)) D^2u(x) - I||_inf
  double involution_error = 0.0;        // max |L(L(u)) - u| over interior source nodes
  /// max |-sum arctan(1/mu_i) + f(Du~(p), p) + c| with mu_i the eigenvalues
  /// of D^2u~ at p = Du(x); present when a translation constant is given.
  std::optional<double> dual_residual;
};

/// Checks the duality identities between u and its conjugate u_tilde.
/// Derivatives of u_tilde come from central stencils at interior target
/// nodes, interpolated multilinearly; points whose target cell has a
/// non-interior corner are skipped.
DualityReport duality_checks(const Field& u, const Field& u_tilde,
                             const SourceTerm* source = nullptr,
                             std::optional<double> c_inf = std::nullopt);

}  // namespace lmc
