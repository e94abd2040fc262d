#include "lmc/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lmc/arctan_operator.hpp"

namespace lmc {

Field legendre_transform(const Field& u, std::shared_ptr<const Lattice> target_lattice) {
  const Lattice& src = u.lattice();
  const int n = src.dim();
  // Source nodes packed as (x_0, .., x_{n-1}, u) rows for a tight inner loop.
  std::vector<double> packed;
  packed.reserve(src.active_nodes().size() * static_cast<std::size_t>(n + 1));
  for (int idx : src.active_nodes()) {
    const Vec x = src.position(idx);
    for (int k = 0; k < n; ++k) packed.push_back(x(k));
    packed.push_back(u[idx]);
  }
  const std::size_t stride = static_cast<std::size_t>(n + 1);

  Field out(target_lattice);
  for (int idx : target_lattice->active_nodes()) {
    const Vec p = target_lattice->position(idx);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t row = 0; row < packed.size(); row += stride) {
      double v = -packed[row + static_cast<std::size_t>(n)];
      for (int k = 0; k < n; ++k) v += packed[row + static_cast<std::size_t>(k)] * p(k);
      best = std::max(best, v);
    }
    out[idx] = best;
  }
  return out;
}

DualityReport duality_checks(const Field& u, const Field& u_tilde,
                             const SourceTerm* source, std::optional<double> c_inf) {
  const Lattice& src = u.lattice();
  const Lattice& tgt = u_tilde.lattice();
  const int n = src.dim();
  const std::size_t size = static_cast<std::size_t>(tgt.size());

  // Derivative fields of u~ at interior target nodes.
  std::vector<std::vector<double>> grad(static_cast<std::size_t>(n),
                                        std::vector<double>(size, 0.0));
  std::vector<std::vector<double>> hess(static_cast<std::size_t>(n * n),
                                        std::vector<double>(size, 0.0));
  for (int idx : tgt.interior_nodes()) {
    const Vec g = gradient(u_tilde, idx);
    const Mat hm = hessian(u_tilde, idx);
    for (int k = 0; k < n; ++k) {
      grad[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx)] = g(k);
      for (int l = 0; l < n; ++l) {
        hess[static_cast<std::size_t>(k * n + l)][static_cast<std::size_t>(idx)] = hm(k, l);
      }
    }
  }

  DualityReport report;
  if (c_inf) report.dual_residual = 0.0;
  const Mat eye = Mat::Identity(n, n);
  for (int idx : src.interior_nodes()) {
    const Vec x = src.position(idx);
    const Vec p = gradient(u, idx);
    if (!cell_is_interior(tgt, p)) continue;
    ++report.checked_points;

    Vec gt(n);
    Mat ht(n, n);
    for (int k = 0; k < n; ++k) {
      gt(k) = interpolate(tgt, grad[static_cast<std::size_t>(k)], p);
      for (int l = 0; l < n; ++l) {
        ht(k, l) = interpolate(tgt, hess[static_cast<std::size_t>(k * n + l)], p);
      }
    }
    report.gradient_inverse_error =
        std::max(report.gradient_inverse_error, (gt - x).norm());
    const Mat prod = ht * hessian(u, idx) - eye;
    report.hessian_product_error =
        std::max(report.hessian_product_error, prod.cwiseAbs().rowwise().sum().maxCoeff());

    if (c_inf) {
      const Vec mu = sym_eigenvalues(0.5 * (ht + ht.transpose()));
      double dual = 0.0;
      for (int k = 0; k < n; ++k) dual -= std::atan(1.0 / mu(k));
      if (source) dual += source->value(gt, p);
      dual += *c_inf;
      *report.dual_residual = std::max(*report.dual_residual, std::abs(dual));
    }
  }

  const Field back = legendre_transform(u_tilde, u.lattice_ptr());
  for (int idx : src.interior_nodes()) {
    report.involution_error = std::max(report.involution_error, std::abs(back[idx] - u[idx]));
  }
  return report;
}

}  // namespace lmc
