#include "lmc/arctan_operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "lmc/error.hpp"

namespace lmc {
namespace {

void require_symmetric(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() < 1 || a.rows() > 3) {
    throw Error("operator", "bad-dimension",
                "expected a square matrix of size 1..3");
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-12) {
        throw Error("operator", "not-symmetric",
                    "matrix entries (" + std::to_string(i) + "," +
                        std::to_string(j) + ") differ");
      }
    }
  }
}

void fix_sign(Mat& v, Eigen::Index col) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.rows(); ++i) {
    if (std::abs(v(i, col)) > std::abs(v(best, col))) best = i;
  }
  if (v(best, col) < 0.0) v.col(col) *= -1.0;
}

Vec eigenvalues_2x2(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  Vec l(2);
  l << mean - radius, mean + radius;
  return l;
}

// Trigonometric solution of the characteristic cubic.
Vec eigenvalues_3x3(const Mat& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = a.trace() / 3.0;
  Vec l(3);
  if (p1 <= 1e-300) {
    l << a(0, 0), a(1, 1), a(2, 2);
    std::sort(l.data(), l.data() + 3);
    return l;
  }
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) +
                    (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Mat b = (a - q * Mat::Identity(3, 3)) / p;
  const double r = std::clamp(0.5 * b.determinant(), -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double hi = q + 2.0 * p * std::cos(phi);
  const double lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  l << lo, 3.0 * q - hi - lo, hi;
  std::sort(l.data(), l.data() + 3);
  return l;
}

// Null vector of (A - lambda I) from the best-conditioned row cross product.
Eigen::Vector3d null_vector_3x3(const Mat& a, double lambda, bool* ok) {
  Eigen::Matrix3d m = a;
  m.diagonal().array() -= lambda;
  const Eigen::Vector3d r0 = m.row(0), r1 = m.row(1), r2 = m.row(2);
  Eigen::Vector3d c[3] = {r0.cross(r1), r0.cross(r2), r1.cross(r2)};
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (c[i].squaredNorm() > c[best].squaredNorm()) best = i;
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  *ok = c[best].norm() > 1e-10 * scale * scale;
  return *ok ? Eigen::Vector3d(c[best].normalized()) : Eigen::Vector3d::Zero();
}

Eigen::Vector3d any_orthogonal(const Eigen::Vector3d& v) {
  Eigen::Vector3d trial = std::abs(v(0)) < 0.9 ? Eigen::Vector3d::UnitX()
                                                : Eigen::Vector3d::UnitY();
  return (trial - trial.dot(v) * v).normalized();
}

// Trigonometric eigenvalues lose accuracy near repeated roots, so only the
// best-separated one is used: its eigenvector comes from a cross product and
// the remaining 2x2 block on the orthogonal complement is solved exactly.
SpectralData spectral_3x3(const Mat& a) {
  const Vec trig = eigenvalues_3x3(a);
  const int iso = trig(1) - trig(0) > trig(2) - trig(1) ? 0 : 2;
  bool ok = false;
  const Eigen::Vector3d v = null_vector_3x3(a, trig(iso), &ok);
  SpectralData out;
  if (!ok) {
    // Near-triple cluster: no direction is distinguished.
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver{Eigen::Matrix3d(a)};
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
    return out;
  }
  const Eigen::Matrix3d m = a;
  const Eigen::Vector3d u = any_orthogonal(v);
  const Eigen::Vector3d w = v.cross(u);
  const double b00 = u.dot(m * u), b01 = u.dot(m * w), b11 = w.dot(m * w);
  const Vec l2 = eigenvalues_2x2(b00, b01, b11);
  const double phi = 0.5 * std::atan2(2.0 * b01, b00 - b11);
  const double c = std::cos(phi), s = std::sin(phi);

  std::array<std::pair<double, Eigen::Vector3d>, 3> pairs = {{
      {v.dot(m * v), v},
      {l2(0), -s * u + c * w},
      {l2(1), c * u + s * w},
  }};
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  out.eigenvalues.resize(3);
  out.eigenvectors.resize(3, 3);
  for (int k = 0; k < 3; ++k) {
    out.eigenvalues(k) = pairs[static_cast<std::size_t>(k)].first;
    out.eigenvectors.col(k) = pairs[static_cast<std::size_t>(k)].second;
  }
  return out;
}

}  // namespace

Vec sym_eigenvalues(const Mat& a) {
  require_symmetric(a);
  switch (a.rows()) {
    case 1:
      return make_vec(a(0, 0));
    case 2:
      return eigenvalues_2x2(a(0, 0), a(0, 1), a(1, 1));
    default:
      return spectral_3x3(a).eigenvalues;
  }
}

SpectralData sym_eigen(const Mat& a) {
  SpectralData out;
  out.eigenvalues = sym_eigenvalues(a);
  const auto n = a.rows();
  if (n == 1) {
    out.eigenvectors = Mat::Identity(1, 1);
  } else if (n == 2) {
    const double phi = 0.5 * std::atan2(2.0 * a(0, 1), a(0, 0) - a(1, 1));
    const double c = std::cos(phi), s = std::sin(phi);
    out.eigenvectors.resize(2, 2);
    // phi rotates e1 onto the eigenvector of the larger eigenvalue.
    out.eigenvectors << -s, c, c, s;
  } else {
    out = spectral_3x3(a);
  }
  for (Eigen::Index k = 0; k < n; ++k) fix_sign(out.eigenvectors, k);
  return out;
}

double lagrangian_angle(const Mat& a) {
  require_symmetric(a);
  if (a.rows() == 1) return std::atan(a(0, 0));
  if (a.rows() == 2) return lagrangian_angle_2d(a(0, 0), a(0, 1), a(1, 1));
  const Vec l = spectral_3x3(a).eigenvalues;
  return std::atan(l(0)) + std::atan(l(1)) + std::atan(l(2));
}

Mat lagrangian_angle_derivative(const Mat& a) {
  require_symmetric(a);
  const auto n = a.rows();
  const Mat g = Mat::Identity(n, n) + a * a;
  if (n == 1) {
    Mat out(1, 1);
    out << 1.0 / g(0, 0);
    return out;
  }
  // g is SPD with det >= 1, so the adjugate formula is well conditioned.
  return g.inverse();
}

StructureSums structure_sums(const Vec& eigenvalues) {
  StructureSums s;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double l2 = eigenvalues(i) * eigenvalues(i);
    s.sum_f += 1.0 / (1.0 + l2);
    s.sum_f_lam2 += l2 / (1.0 + l2);
  }
  return s;
}

StructureSums structure_sums(const Mat& a) {
  return structure_sums(sym_eigenvalues(a));
}

StructureConstants structure_constants(double f_max0, double f_min0,
                                       double delta, int n) {
  const double half_range = 0.5 * n * std::numbers::pi;
  const double delta_max = std::min(half_range - f_max0, f_min0);
  if (!(delta >= 0.0) || !(delta < delta_max)) {
    throw Error("operator", "delta-out-of-range",
                "delta=" + std::to_string(delta) +
                    " must lie in [0, " + std::to_string(delta_max) + ")");
  }
  StructureConstants s;
  s.n = n;
  s.delta = delta;
  s.f_max0 = f_max0;
  s.f_min0 = f_min0;
  s.mu1 = std::tan((f_max0 + delta) / n);
  s.mu2 = std::tan((f_min0 - delta) / n);
  s.lambda1 = std::min(1.0 / (1.0 + s.mu1 * s.mu1),
                       s.mu2 * s.mu2 / (1.0 + s.mu2 * s.mu2));
  return s;
}

Mat spd_sqrt(const Mat& a) {
  const SpectralData sd = sym_eigen(a);
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
    if (!(sd.eigenvalues(i) > 0.0)) {
      throw Error("operator", "not-positive-definite",
                  "matrix square root needs an SPD argument");
    }
  }
  const Vec root = sd.eigenvalues.cwiseSqrt();
  Mat out = sd.eigenvectors * root.asDiagonal() * sd.eigenvectors.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace lmc
