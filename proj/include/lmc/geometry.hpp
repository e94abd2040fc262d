#pragma once

#include <array>
#include <utility>
#include <vector>

#include "lmc/types.hpp"

namespace lmc {

enum class DomainKind { interval, ball, ellipse };

const char* to_string(DomainKind kind);

/// A uniformly convex domain {x : (x-q)^T M (x-q) < 1} described by the
/// concave quadratic defining function
///
///   h(p) = (1 - (p-q)^T M (p-q)) / s,   s = 2 sqrt(lambda_max(M)),
///
/// so that max |Dh| over the boundary is 1. For balls this is the usual
/// (R^2 - |p-q|^2)/(2R) with |Dh| = 1 on the whole boundary; for intervals it
/// is (b-p)(p-a)/(b-a). Ellipses only get the max-normalization, so their
/// theta/Theta are conservative.
class ConvexDomain {
 public:
  static ConvexDomain interval(double a, double b);
  static ConvexDomain ball(const Vec& center, double radius);
  static ConvexDomain ellipse(const Vec& center, const Mat& shape);

  DomainKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  const Mat& shape_matrix() const { return shape_; }

  double theta() const { return theta_; }
  double Theta() const { return big_theta_; }
  double grad_h_max() const { return 1.0; }
  double abs_h_max() const { return 1.0 / scale_; }
  double diameter() const { return diameter_; }
  /// Half-widths of the axis-aligned bounding box.
  Vec half_extent() const;

  double value(const Vec& p) const;
  /// Coefficients {a0, a1, a2} with h(p0 + v dir) = a0 + a1 v + a2 v^2.
  std::array<double, 3> along_line(const Vec& p0, const Vec& dir) const;
  Vec gradient(const Vec& p) const;
  Mat hessian(const Vec& /*p*/) const { return hessian_; }
  /// Normalization s in h = (1 - y^T M y) / s.
  double scale() const { return scale_; }

  /// Unit inward normal Dh/|Dh| at a point with |h(x)| <= tol.
  Vec inward_normal(const Vec& x, double tol = 1e-8) const;
  /// Point on the boundary at angle t (ball/ellipse) or endpoint t<0.5 -> a.
  Vec boundary_point(double t) const;
  /// Angle-uniform boundary sampling (two endpoints for intervals).
  std::vector<Vec> boundary_samples(int count = 512) const;

  /// Max of y.v over the closure, i.e. the support function.
  double support(const Vec& v) const;
  /// (min, max) of |y - point| over the closure.
  std::pair<double, double> distance_range(const Vec& point) const;

 private:
  ConvexDomain(DomainKind kind, Vec center, Mat shape);

  DomainKind kind_;
  Vec center_;
  Mat shape_;
  Mat shape_inv_;
  Mat hessian_;
  double scale_ = 1.0;
  double theta_ = 0.0;
  double big_theta_ = 0.0;
  double diameter_ = 0.0;
};

/// SPD A with A N A = M, where M, N are the shape matrices of omega and
/// target. Then Du0(x) = A(x - q) + q~ maps the boundary of omega onto the
/// boundary of target.
Mat quadratic_initial_map(const ConvexDomain& omega, const ConvexDomain& target);

}  // namespace lmc
