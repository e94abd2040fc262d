#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmc/geometry.hpp"
#include "lmc/types.hpp"

namespace lmc {

enum class SourceKind { affine, separable_quadratic };

/// The inhomogeneity f(x, p), concave in x and convex in p:
///   affine:              f = iota.p + kappa.x + c0
///   separable_quadratic: f = eps (-a |x - x0|^2 + b |p - p0|^2)
class SourceTerm {
 public:
  static SourceTerm zero(int dim);
  static SourceTerm affine(const Vec& iota, const Vec& kappa, double c0);
  static SourceTerm separable_quadratic(double eps, double a, double b,
                                        const Vec& x0, const Vec& p0);

  SourceKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(iota_.size()); }
  bool is_zero() const;

  const Vec& iota() const { return iota_; }
  const Vec& kappa() const { return kappa_; }
  double c0() const { return c0_; }
  double eps() const { return eps_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const Vec& x0() const { return x0_; }
  const Vec& p0() const { return p0_; }

  double value(const Vec& x, const Vec& p) const;
  Vec grad_x(const Vec& x, const Vec& p) const;
  Vec grad_p(const Vec& x, const Vec& p) const;
  Mat hess_xx(const Vec& x, const Vec& p) const;
  Mat hess_pp(const Vec& x, const Vec& p) const;
  Mat hess_xp(const Vec& x, const Vec& p) const;

  /// Analytic sup-norms of D_x f, D_p f, D_xp f over closure(omega) x
  /// closure(target).
  double sup_grad_x(const ConvexDomain& omega) const;
  double sup_grad_p(const ConvexDomain& target) const;
  double sup_hess_xp() const { return 0.0; }

  /// sup and inf of f over closure(omega) x closure(target).
  double sup_value(const ConvexDomain& omega, const ConvexDomain& target) const;
  double inf_value(const ConvexDomain& omega, const ConvexDomain& target) const;

 private:
  SourceKind kind_ = SourceKind::affine;
  Vec iota_, kappa_;
  double c0_ = 0.0;
  double eps_ = 0.0, a_ = 0.0, b_ = 0.0;
  Vec x0_, p0_;
};

/// max over x and p, q in closure(target) of |f(x,p) - f(x,q)|.
double oscillation_in_p(const SourceTerm& src, const ConvexDomain& target);

/// The smallness conditions under which the flow's estimates hold, evaluated
/// for one (source, omega, target, u0) configuration.
struct AdmissibilityReport {
  double delta = 0.0;
  double delta_max = 0.0;
  double lambda1 = 0.0;
  double osc_p = 0.0;
  double sup_dx = 0.0;
  double sup_dp = 0.0;
  double sup_dxp = 0.0;
  // |D_p f| <= theta(omega) Lambda1 / (2 max|Dh_omega|)
  double bound_lcond = 0.0;
  // |D_x f| <= theta(target) Lambda1 / (2 max|Dh_target|)
  double bound_dfcond = 0.0;
  // |D_xp f| <= Lambda1 theta(omega) / (8 max|h_omega|)
  double bound_dxp_omega = 0.0;
  // |D_xp f| <= Lambda1 theta(target) / (8 max|h_target|)
  double bound_dxp_target = 0.0;
  bool pass_delta = false;
  bool pass_lcond = false;
  bool pass_dfcond = false;
  bool pass_dxp_omega = false;
  bool pass_dxp_target = false;
  std::optional<double> eps0;
  std::vector<std::string> failures;

  bool pass() const {
    return pass_delta && pass_lcond && pass_dfcond && pass_dxp_omega &&
           pass_dxp_target;
  }
};

struct HessianRange {
  double f_max0 = 0.0;  // max of F[D^2 u0]
  double f_min0 = 0.0;  // min of F[D^2 u0]
};

/// Evaluates every smallness condition. delta defaults to the exact
/// p-oscillation of f; pass delta_override to experiment with a fixed value.
/// For affine sources also computes eps0, the largest eps with
/// |iota| = |kappa| = eps passing everything (bisection to 1e-6).
AdmissibilityReport admissibility(const SourceTerm& src,
                                  const ConvexDomain& omega,
                                  const ConvexDomain& target,
                                  HessianRange range, int n,
                                  std::optional<double> delta_override = {});

/// True when an affine source with |iota| = |kappa| = eps passes every
/// condition; eps0 is the supremum of this set.
bool affine_eps_admissible(double eps, const ConvexDomain& omega,
                           const ConvexDomain& target, HessianRange range,
                           int n);

}  // namespace lmc
