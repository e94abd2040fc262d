#include "lmc/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmc/arctan_operator.hpp"
#include "lmc/error.hpp"

namespace lmc {

namespace {

double min_hessian_eigenvalue(const Field& u) {
  double lo = std::numeric_limits<double>::infinity();
  for (int idx : u.lattice().interior_nodes()) {
    lo = std::min(lo, sym_eigenvalues(hessian(u, idx)).minCoeff());
  }
  return lo;
}

}  // namespace

StationaryProblem::StationaryProblem(std::shared_ptr<const Lattice> lattice,
                                     SourceTerm source, ConvexDomain target,
                                     Orientation orientation)
    : lattice_(std::move(lattice)),
      source_(std::move(source)),
      target_(std::move(target)),
      orientation_(std::move(orientation)) {
  if (orientation_.size() != lattice_->boundary_nodes().size()) {
    throw Error("stationary", "bad-orientation",
                "orientation does not match the boundary node count");
  }
  stencils_ = boundary_stencils(*lattice_, orientation_);
  column_of_.assign(static_cast<std::size_t>(lattice_->size()), -1);
  for (int idx : lattice_->active_nodes()) {
    column_of_[static_cast<std::size_t>(idx)] = static_cast<int>(columns_.size());
    columns_.push_back(idx);
  }
}

Eigen::VectorXd StationaryProblem::pack(const Field& u, double c) const {
  Eigen::VectorXd z(unknowns());
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    z(static_cast<Eigen::Index>(k)) = u[columns_[k]];
  }
  z(unknowns() - 1) = c;
  return z;
}

void StationaryProblem::unpack(const Eigen::VectorXd& z, Field& u, double& c) const {
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    u[columns_[k]] = z(static_cast<Eigen::Index>(k));
  }
  c = z(unknowns() - 1);
}

Eigen::VectorXd StationaryProblem::residual(const Field& u, double c) const {
  const Lattice& lat = *lattice_;
  const auto& interior = lat.interior_nodes();
  Eigen::VectorXd r(rows());
  Eigen::Index row = 0;
  double mean = 0.0;
  for (int idx : interior) {
    const Vec x = lat.position(idx);
    r(row++) = lagrangian_angle(hessian(u, idx)) - source_.value(x, gradient(u, idx)) - c;
    mean += u[idx];
  }
  for (std::size_t slot = 0; slot < stencils_.size(); ++slot) {
    r(row++) = target_.value(boundary_gradient(u, stencils_[slot]));
  }
  r(row) = mean / static_cast<double>(interior.size());
  return r;
}

Eigen::MatrixXd StationaryProblem::jacobian(const Field& u, double /*c*/) const {
  const Lattice& lat = *lattice_;
  const int n = lat.dim();
  const double h = lat.spacing();
  const double inv2 = 1.0 / (h * h);
  const auto& interior = lat.interior_nodes();
  const int c_col = unknowns() - 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rows(), unknowns());

  Eigen::Index row = 0;
  for (int idx : interior) {
    const Mat dF = lagrangian_angle_derivative(hessian(u, idx));
    const Vec fp = source_.grad_p(lat.position(idx), gradient(u, idx));
    auto add = [&](int node, double w) { jac(row, column(node)) += w; };
    for (int k = 0; k < n; ++k) {
      const int sk = lat.stride(k);
      add(idx + sk, dF(k, k) * inv2 - fp(k) / (2.0 * h));
      add(idx - sk, dF(k, k) * inv2 + fp(k) / (2.0 * h));
      add(idx, -2.0 * dF(k, k) * inv2);
      for (int l = k + 1; l < n; ++l) {
        const int sl = lat.stride(l);
        const double w = 2.0 * dF(k, l) * 0.25 * inv2;
        add(idx + sk + sl, w);
        add(idx - sk - sl, w);
        add(idx + sk - sl, -w);
        add(idx - sk + sl, -w);
      }
    }
    jac(row, c_col) = -1.0;
    ++row;
  }
  for (const BoundaryStencil& st : stencils_) {
    const Vec dh = target_.gradient(boundary_gradient(u, st));
    for (int j = 0; j < st.count; ++j) {
      double w = 0.0;
      for (int k = 0; k < n; ++k) {
        w += dh(k) * st.weights[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      }
      jac(row, column(st.nodes[static_cast<std::size_t>(j)])) += w;
    }
    ++row;
  }
  const double inv_count = 1.0 / static_cast<double>(interior.size());
  for (int idx : interior) jac(row, column(idx)) = inv_count;
  return jac;
}

NewtonResult newton_solve(const Field& u_init, const SourceTerm& source,
                          const ConvexDomain& target, const NewtonOptions& options) {
  const auto lattice = u_init.lattice_ptr();
  const Lattice& lat = *lattice;
  if (!u_init.all_finite() || !(min_hessian_eigenvalue(u_init) >= options.eps_convex)) {
    throw Error("stationary", "inadmissible-initial-data",
                "initial data is not convex on the lattice");
  }

  Orientation orient;
  if (options.orientation) {
    orient = *options.orientation;
  } else {
    const BoundaryStencils defaults = boundary_stencils(lat, lat.default_orientation());
    orient = orientation_from_state(u_init, defaults, target);
  }
  const StationaryProblem problem(lattice, source, target, orient);

  double worst_bc = 0.0;
  for (std::size_t slot = 0; slot < problem.stencils().size(); ++slot) {
    worst_bc = std::max(worst_bc, std::abs(boundary_residual(
                                      u_init, static_cast<int>(slot),
                                      problem.stencils()[slot], target)));
  }
  if (!(worst_bc <= 10.0 * lat.spacing())) {
    throw Error("stationary", "inadmissible-initial-data",
                "boundary residual " + std::to_string(worst_bc) + " exceeds 10 * spacing");
  }

  NewtonResult out{u_init, 0.0, 0, false, 0.0, {}, orient};
  {
    double mean = 0.0;
    for (int idx : lat.interior_nodes()) {
      mean += lagrangian_angle(hessian(u_init, idx)) -
              source.value(lat.position(idx), gradient(u_init, idx));
    }
    out.c = mean / static_cast<double>(lat.interior_nodes().size());
  }

  Eigen::VectorXd z = problem.pack(out.u, out.c);
  Eigen::VectorXd r = problem.residual(out.u, out.c);
  out.residual_inf = r.lpNorm<Eigen::Infinity>();
  out.history.push_back({0, out.residual_inf, r.norm(), 0.0, out.c});

  Field trial_u = out.u;
  for (int it = 1; it <= options.max_iterations; ++it) {
    if (out.residual_inf <= options.tolerance) {
      out.converged = true;
      return out;
    }
    const Eigen::MatrixXd jac = problem.jacobian(out.u, out.c);
    const Eigen::VectorXd delta = jac.partialPivLu().solve(-r);
    if (!delta.allFinite()) {
      throw Error("stationary", "newton-stagnated", "singular Newton system");
    }

    const double norm0 = r.norm();
    double scale = 1.0;
    bool accepted = false;
    bool convexity_blocked = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving, scale *= 0.5) {
      const Eigen::VectorXd z_trial = z + scale * delta;
      double c_trial = 0.0;
      problem.unpack(z_trial, trial_u, c_trial);
      if (!(min_hessian_eigenvalue(trial_u) >= options.eps_convex)) {
        convexity_blocked = true;
        continue;
      }
      const Eigen::VectorXd r_trial = problem.residual(trial_u, c_trial);
      if (r_trial.allFinite() && r_trial.norm() < norm0) {
        z = z_trial;
        r = r_trial;
        std::swap(out.u, trial_u);
        out.c = c_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (convexity_blocked) {
        throw Error("stationary", "convexity-lost",
                    "every damped Newton step left the convex cone");
      }
      throw Error("stationary", "newton-stagnated",
                  "backtracking exhausted at iteration " + std::to_string(it));
    }
    out.iterations = it;
    out.residual_inf = r.lpNorm<Eigen::Infinity>();
    out.history.push_back({it, out.residual_inf, r.norm(), scale, out.c});
  }
  out.converged = out.residual_inf <= options.tolerance;
  return out;
}

}  // namespace lmc
