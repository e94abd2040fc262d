#include "lmc/source.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lmc/arctan_operator.hpp"
#include "lmc/error.hpp"

namespace lmc {

SourceTerm SourceTerm::zero(int dim) {
  return affine(Vec::Zero(dim), Vec::Zero(dim), 0.0);
}

SourceTerm SourceTerm::affine(const Vec& iota, const Vec& kappa, double c0) {
  if (iota.size() != kappa.size() || iota.size() < 1 || iota.size() > 3) {
    throw Error("source", "invalid-source", "iota and kappa sizes differ");
  }
  SourceTerm s;
  s.kind_ = SourceKind::affine;
  s.iota_ = iota;
  s.kappa_ = kappa;
  s.c0_ = c0;
  s.x0_ = Vec::Zero(iota.size());
  s.p0_ = Vec::Zero(iota.size());
  return s;
}

SourceTerm SourceTerm::separable_quadratic(double eps, double a, double b,
                                           const Vec& x0, const Vec& p0) {
  if (eps < 0.0 || a < 0.0 || b < 0.0) {
    throw Error("source", "invalid-source",
                "separable_quadratic needs eps, a, b >= 0");
  }
  if (x0.size() != p0.size()) {
    throw Error("source", "invalid-source", "x0 and p0 sizes differ");
  }
  SourceTerm s;
  s.kind_ = SourceKind::separable_quadratic;
  s.eps_ = eps;
  s.a_ = a;
  s.b_ = b;
  s.x0_ = x0;
  s.p0_ = p0;
  s.iota_ = Vec::Zero(x0.size());
  s.kappa_ = Vec::Zero(x0.size());
  return s;
}

bool SourceTerm::is_zero() const {
  if (kind_ == SourceKind::affine) {
    return iota_.isZero(0.0) && kappa_.isZero(0.0) && c0_ == 0.0;
  }
  return eps_ == 0.0 || (a_ == 0.0 && b_ == 0.0);
}

double SourceTerm::value(const Vec& x, const Vec& p) const {
  if (kind_ == SourceKind::affine) {
    return iota_.dot(p) + kappa_.dot(x) + c0_;
  }
  return eps_ * (-a_ * (x - x0_).squaredNorm() + b_ * (p - p0_).squaredNorm());
}

Vec SourceTerm::grad_x(const Vec& x, const Vec& /*p*/) const {
  if (kind_ == SourceKind::affine) return kappa_;
  return -2.0 * eps_ * a_ * (x - x0_);
}

Vec SourceTerm::grad_p(const Vec& /*x*/, const Vec& p) const {
  if (kind_ == SourceKind::affine) return iota_;
  return 2.0 * eps_ * b_ * (p - p0_);
}

Mat SourceTerm::hess_xx(const Vec& x, const Vec& /*p*/) const {
  const auto n = x.size();
  if (kind_ == SourceKind::affine) return Mat::Zero(n, n);
  return -2.0 * eps_ * a_ * Mat::Identity(n, n);
}

Mat SourceTerm::hess_pp(const Vec& /*x*/, const Vec& p) const {
  const auto n = p.size();
  if (kind_ == SourceKind::affine) return Mat::Zero(n, n);
  return 2.0 * eps_ * b_ * Mat::Identity(n, n);
}

Mat SourceTerm::hess_xp(const Vec& x, const Vec& /*p*/) const {
  const auto n = x.size();
  return Mat::Zero(n, n);
}

double SourceTerm::sup_grad_x(const ConvexDomain& omega) const {
  if (kind_ == SourceKind::affine) return kappa_.norm();
  return 2.0 * eps_ * a_ * omega.distance_range(x0_).second;
}

double SourceTerm::sup_grad_p(const ConvexDomain& target) const {
  if (kind_ == SourceKind::affine) return iota_.norm();
  return 2.0 * eps_ * b_ * target.distance_range(p0_).second;
}

double SourceTerm::sup_value(const ConvexDomain& omega,
                             const ConvexDomain& target) const {
  if (kind_ == SourceKind::affine) {
    return target.support(iota_) + omega.support(kappa_) + c0_;
  }
  const auto [x_near, x_far] = omega.distance_range(x0_);
  const auto [p_near, p_far] = target.distance_range(p0_);
  return eps_ * (-a_ * x_near * x_near + b_ * p_far * p_far);
}

double SourceTerm::inf_value(const ConvexDomain& omega,
                             const ConvexDomain& target) const {
  if (kind_ == SourceKind::affine) {
    return -target.support(-iota_) - omega.support(-kappa_) + c0_;
  }
  const auto [x_near, x_far] = omega.distance_range(x0_);
  const auto [p_near, p_far] = target.distance_range(p0_);
  return eps_ * (-a_ * x_far * x_far + b_ * p_near * p_near);
}

double oscillation_in_p(const SourceTerm& src, const ConvexDomain& target) {
  if (src.kind() == SourceKind::affine) {
    // Width of the target in direction iota; equals |iota| diam for balls.
    return target.support(src.iota()) + target.support(-src.iota());
  }
  const auto [p_near, p_far] = target.distance_range(src.p0());
  return src.eps() * src.b() * (p_far * p_far - p_near * p_near);
}

namespace {

struct Bounds {
  double lcond, dfcond, dxp_omega, dxp_target;
};

Bounds smallness_bounds(double lambda1, const ConvexDomain& omega,
                        const ConvexDomain& target) {
  return {omega.theta() * lambda1 / (2.0 * omega.grad_h_max()),
          target.theta() * lambda1 / (2.0 * target.grad_h_max()),
          lambda1 * omega.theta() / (8.0 * omega.abs_h_max()),
          lambda1 * target.theta() / (8.0 * target.abs_h_max())};
}

double delta_limit(HessianRange range, int n) {
  return std::min(0.5 * n * std::numbers::pi - range.f_max0, range.f_min0);
}

}  // namespace

bool affine_eps_admissible(double eps, const ConvexDomain& omega,
                           const ConvexDomain& target, HessianRange range,
                           int n) {
  // Worst direction of iota: oscillation eps * diam(target).
  const double delta = eps * target.diameter();
  if (!(delta < delta_limit(range, n))) return false;
  const double lambda1 =
      structure_constants(range.f_max0, range.f_min0, delta, n).lambda1;
  const Bounds b = smallness_bounds(lambda1, omega, target);
  return eps <= b.lcond && eps <= b.dfcond;
}

AdmissibilityReport admissibility(const SourceTerm& src,
                                  const ConvexDomain& omega,
                                  const ConvexDomain& target,
                                  HessianRange range, int n,
                                  std::optional<double> delta_override) {
  const double half_range = 0.5 * n * std::numbers::pi;
  if (!(range.f_min0 > 0.0) || !(range.f_max0 < half_range)) {
    throw Error("source", "inadmissible-initial-data",
                "need 0 < min F[D^2 u0] and max F[D^2 u0] < n pi/2");
  }
  AdmissibilityReport r;
  r.osc_p = oscillation_in_p(src, target);
  r.delta = delta_override.value_or(r.osc_p);
  r.delta_max = delta_limit(range, n);
  r.sup_dx = src.sup_grad_x(omega);
  r.sup_dp = src.sup_grad_p(target);
  r.sup_dxp = src.sup_hess_xp();

  r.pass_delta = r.delta >= r.osc_p && r.delta < r.delta_max;
  if (r.delta < r.osc_p) {
    r.failures.push_back("delta below the p-oscillation of f");
  }
  if (!(r.delta < r.delta_max)) {
    r.failures.push_back("delta exceeds delta_max");
  } else {
    r.lambda1 = structure_constants(range.f_max0, range.f_min0, r.delta, n)
                    .lambda1;
    const Bounds b = smallness_bounds(r.lambda1, omega, target);
    r.bound_lcond = b.lcond;
    r.bound_dfcond = b.dfcond;
    r.bound_dxp_omega = b.dxp_omega;
    r.bound_dxp_target = b.dxp_target;
    r.pass_lcond = r.sup_dp <= b.lcond;
    r.pass_dfcond = r.sup_dx <= b.dfcond;
    r.pass_dxp_omega = r.sup_dxp <= b.dxp_omega;
    r.pass_dxp_target = r.sup_dxp <= b.dxp_target;
    if (!r.pass_lcond) r.failures.push_back("|D_p f| exceeds bound_lcond");
    if (!r.pass_dfcond) r.failures.push_back("|D_x f| exceeds bound_dfcond");
    if (!r.pass_dxp_omega) {
      r.failures.push_back("|D_xp f| exceeds bound_Dxp_omega");
    }
    if (!r.pass_dxp_target) {
      r.failures.push_back("|D_xp f| exceeds bound_Dxp_target");
    }
  }

  if (src.kind() == SourceKind::affine) {
    double lo = 0.0;
    double hi = r.delta_max / target.diameter();
    while (hi - lo > 1e-7) {
      const double mid = 0.5 * (lo + hi);
      (affine_eps_admissible(mid, omega, target, range, n) ? lo : hi) = mid;
    }
    r.eps0 = lo;
  }
  return r;
}

}  // namespace lmc
