#include "lmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lmc/arctan_operator.hpp"
#include "lmc/error.hpp"

namespace lmc {

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval:
      return "interval";
    case DomainKind::ball:
      return "ball";
    case DomainKind::ellipse:
      return "ellipse";
  }
  return "unknown";
}

ConvexDomain::ConvexDomain(DomainKind kind, Vec center, Mat shape)
    : kind_(kind), center_(std::move(center)), shape_(std::move(shape)) {
  const Vec l = sym_eigenvalues(shape_);
  if (!(l(0) > 0.0)) {
    throw Error("geometry", "invalid-domain",
                "shape matrix must be positive definite");
  }
  const double l_min = l(0), l_max = l(l.size() - 1);
  scale_ = 2.0 * std::sqrt(l_max);
  theta_ = 2.0 * l_min / scale_;
  big_theta_ = 2.0 * l_max / scale_;
  diameter_ = 2.0 / std::sqrt(l_min);
  shape_inv_ = shape_.inverse();
  hessian_ = (-2.0 / scale_) * shape_;
}

ConvexDomain ConvexDomain::interval(double a, double b) {
  if (!(b > a)) {
    throw Error("geometry", "invalid-domain", "interval needs a < b");
  }
  Mat m(1, 1);
  m << 4.0 / ((b - a) * (b - a));
  return ConvexDomain(DomainKind::interval, make_vec(0.5 * (a + b)), m);
}

ConvexDomain ConvexDomain::ball(const Vec& center, double radius) {
  if (!(radius > 0.0) || center.size() < 1 || center.size() > 3) {
    throw Error("geometry", "invalid-domain", "ball needs radius > 0");
  }
  const auto n = center.size();
  return ConvexDomain(DomainKind::ball, center,
                      Mat::Identity(n, n) / (radius * radius));
}

ConvexDomain ConvexDomain::ellipse(const Vec& center, const Mat& shape) {
  if (center.size() != 2 || shape.rows() != 2 || shape.cols() != 2) {
    throw Error("geometry", "invalid-domain", "ellipse is two-dimensional");
  }
  return ConvexDomain(DomainKind::ellipse, center, shape);
}

Vec ConvexDomain::half_extent() const {
  // Extent along e_k is sqrt((M^{-1})_kk).
  return shape_inv_.diagonal().cwiseSqrt();
}

double ConvexDomain::value(const Vec& p) const {
  const Vec y = p - center_;
  return (1.0 - y.dot(shape_ * y)) / scale_;
}

std::array<double, 3> ConvexDomain::along_line(const Vec& p0, const Vec& dir) const {
  const Vec y = p0 - center_;
  const Vec md = shape_ * dir;
  return {(1.0 - y.dot(shape_ * y)) / scale_, -2.0 * y.dot(md) / scale_,
          -dir.dot(md) / scale_};
}

Vec ConvexDomain::gradient(const Vec& p) const {
  return (-2.0 / scale_) * (shape_ * (p - center_));
}

Vec ConvexDomain::inward_normal(const Vec& x, double tol) const {
  if (std::abs(value(x)) > tol) {
    throw Error("geometry", "not-on-boundary",
                "inward normal requested away from the boundary");
  }
  const Vec g = gradient(x);
  const double norm = g.norm();
  if (norm < 1e-12) {
    throw Error("geometry", "degenerate-normal", "|Dh| vanishes");
  }
  return g / norm;
}

Vec ConvexDomain::boundary_point(double t) const {
  if (dim() == 1) {
    const double half = std::sqrt(shape_inv_(0, 0));
    return make_vec(center_(0) + (t < 0.5 ? -half : half));
  }
  // y = M^{-1/2} (cos t, sin t) satisfies y^T M y = 1.
  const Mat root_inv = spd_sqrt(shape_inv_);
  Vec z = make_vec(std::cos(t), std::sin(t));
  return center_ + root_inv * z;
}

std::vector<Vec> ConvexDomain::boundary_samples(int count) const {
  std::vector<Vec> pts;
  if (dim() == 1) {
    pts.push_back(boundary_point(0.0));
    pts.push_back(boundary_point(1.0));
    return pts;
  }
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    pts.push_back(boundary_point(2.0 * std::numbers::pi * k / count));
  }
  return pts;
}

double ConvexDomain::support(const Vec& v) const {
  return center_.dot(v) + std::sqrt(std::max(0.0, v.dot(shape_inv_ * v)));
}

std::pair<double, double> ConvexDomain::distance_range(const Vec& point) const {
  const Vec d = point - center_;
  if (kind_ != DomainKind::ellipse) {
    const double radius = std::sqrt(shape_inv_(0, 0));
    const double r = d.norm();
    return {std::max(0.0, r - radius), r + radius};
  }
  const Vec l = sym_eigenvalues(shape_);
  if (d.norm() == 0.0) {
    return {0.0, 1.0 / std::sqrt(l(0))};
  }
  // Off-centre ellipse: dense angular scan of the boundary, refined by a
  // golden-section search around the best sample.
  const int samples = 2048;
  auto dist = [&](double t) { return (boundary_point(t) - point).norm(); };
  auto refine = [&](double t0, bool maximize) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = t0 - 2.0 * std::numbers::pi / samples;
    double hi = t0 + 2.0 * std::numbers::pi / samples;
    for (int it = 0; it < 60; ++it) {
      const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
      const bool left = maximize ? dist(a) > dist(b) : dist(a) < dist(b);
      (left ? hi : lo) = left ? b : a;
    }
    return dist(0.5 * (lo + hi));
  };
  double best_max = -1.0, best_min = 1e300, t_max = 0.0, t_min = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / samples;
    const double r = dist(t);
    if (r > best_max) best_max = r, t_max = t;
    if (r < best_min) best_min = r, t_min = t;
  }
  const double far = refine(t_max, true);
  const double near = value(point) >= 0.0 ? 0.0 : refine(t_min, false);
  return {near, far};
}

Mat quadratic_initial_map(const ConvexDomain& omega,
                          const ConvexDomain& target) {
  if (omega.dim() != target.dim()) {
    throw Error("geometry", "dimension-mismatch",
                "source and target domains differ in dimension");
  }
  const Mat& m = omega.shape_matrix();
  const Mat& nn = target.shape_matrix();
  const Mat n_half = spd_sqrt(nn);
  const Mat n_half_inv = n_half.inverse();
  Mat inner = n_half * m * n_half;
  inner = 0.5 * (inner + inner.transpose());
  Mat a = n_half_inv * spd_sqrt(inner) * n_half_inv;
  return 0.5 * (a + a.transpose());
}

}  // namespace lmc
