#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lmc/error.hpp"
#include "lmc/geometry.hpp"
#include "support.hpp"

using namespace lmc;
using lmc::testing::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<ConvexDomain> sample_domains() {
  return {
      ConvexDomain::interval(0.0, 1.0),
      ConvexDomain::interval(-0.5, 2.0),
      ConvexDomain::ball(make_vec(0.0, 0.0), 0.5),
      ConvexDomain::ball(make_vec(0.3, -0.2), 1.3),
      ConvexDomain::ellipse(make_vec(0.0, 0.0), make_mat(1.0, 0.0, 4.0)),
      ConvexDomain::ellipse(make_vec(0.1, 0.2), make_mat(2.0, 0.5, 1.0)),
  };
}

// Rejection sampling inside the bounding box.
Vec interior_point(const ConvexDomain& dom, Rng& rng) {
  const Vec ext = dom.half_extent();
  for (;;) {
    Vec p = dom.center();
    for (int k = 0; k < dom.dim(); ++k) p(k) += rng.uniform(-ext(k), ext(k));
    const Vec y = p - dom.center();
    if (y.dot(dom.shape_matrix() * y) < 0.999) return p;
  }
}

Mat shape_of_ball(double r) { return Mat::Identity(2, 2) / (r * r); }

}  // namespace

TEST_CASE("defining_value examples") {
  const auto ball = ConvexDomain::ball(make_vec(0.0, 0.0), 0.5);
  CHECK(ball.value(make_vec(0.0, 0.0)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::abs(ball.value(make_vec(0.5, 0.0))) < 1e-15);

  // Normalization oracle: max of |D(1 - p^T M p)| = |2 M p| over a boundary scan.
  const Mat m = make_mat(1.0, 0.0, 4.0);
  const auto ellipse = ConvexDomain::ellipse(make_vec(0.0, 0.0), m);
  double s = 0.0;
  for (int k = 0; k < 200000; ++k) {
    const double t = 2.0 * kPi * k / 200000.0;
    const Vec p = make_vec(std::cos(t), 0.5 * std::sin(t));
    s = std::max(s, (2.0 * m * p).norm());
  }
  CHECK(ellipse.value(make_vec(0.0, 0.0)) == doctest::Approx(1.0 / s).epsilon(1e-9));
}

TEST_CASE("defining derivatives examples") {
  const auto ball = ConvexDomain::ball(make_vec(0.0, 0.0), 0.5);
  const Vec g = ball.gradient(make_vec(0.5, 0.0));
  CHECK(g(0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(g(1)) < 1e-15);
  CHECK((ball.hessian(make_vec(0.5, 0.0)) + 2.0 * Mat::Identity(2, 2)).norm() < 1e-14);

  const auto interval = ConvexDomain::interval(0.0, 1.0);
  CHECK(interval.gradient(make_vec(0.0))(0) == doctest::Approx(1.0).epsilon(1e-15));

  const Mat m = make_mat(1.0, 0.0, 4.0);
  const auto ellipse = ConvexDomain::ellipse(make_vec(0.0, 0.0), m);
  const Mat expected = -2.0 * m / ellipse.scale();
  CHECK((ellipse.hessian(make_vec(0.1, 0.2)) - expected).norm() < 1e-14);
}

TEST_CASE("inward_normal examples") {
  const auto ball = ConvexDomain::ball(make_vec(0.0, 0.0), 1.0);
  const Vec a = ball.inward_normal(make_vec(1.0, 0.0));
  CHECK(a(0) == doctest::Approx(-1.0));
  CHECK(std::abs(a(1)) < 1e-15);
  const Vec b = ball.inward_normal(make_vec(0.0, -1.0));
  CHECK(std::abs(b(0)) < 1e-15);
  CHECK(b(1) == doctest::Approx(1.0));

  const auto ellipse = ConvexDomain::ellipse(make_vec(0.0, 0.0), make_mat(1.0, 0.0, 4.0));
  const Vec c = ellipse.inward_normal(make_vec(0.0, 0.5));
  CHECK(std::abs(c(0)) < 1e-15);
  CHECK(c(1) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(ball.inward_normal(make_vec(0.5, 0.0)), Error);
}

TEST_CASE("quadratic_initial_map examples") {
  const auto b1 = ConvexDomain::ball(make_vec(0.0, 0.0), 1.0);
  const auto bhalf = ConvexDomain::ball(make_vec(0.0, 0.0), 0.5);
  CHECK((quadratic_initial_map(b1, bhalf) - 0.5 * Mat::Identity(2, 2)).norm() < 1e-14);

  const auto flat = ConvexDomain::ellipse(make_vec(0.0, 0.0), make_mat(1.0, 0.0, 4.0));
  CHECK((quadratic_initial_map(flat, b1) - make_mat(1.0, 0.0, 2.0)).norm() < 1e-14);

  const Mat n = make_mat(1.0, 0.0, 4.0);
  const auto flat_target = ConvexDomain::ellipse(make_vec(0.0, 0.0), n);
  const Mat a = quadratic_initial_map(b1, flat_target);
  CHECK((a - make_mat(1.0, 0.0, 0.5)).norm() < 1e-14);
  CHECK((a.transpose() * n * a - shape_of_ball(1.0)).norm() < 1e-14);
}

TEST_CASE("h sign: positive inside, zero on the boundary, negative outside") {
  Rng rng(11);
  for (const ConvexDomain& dom : sample_domains()) {
    CAPTURE(to_string(dom.kind()));
    for (int k = 0; k < 1000; ++k) CHECK(dom.value(interior_point(dom, rng)) > 0.0);
    for (const Vec& b : dom.boundary_samples(512)) {
      CHECK(std::abs(dom.value(b)) <= 1e-10);
      const Vec outside = dom.center() + 1.01 * (b - dom.center());
      CHECK(dom.value(outside) < 0.0);
    }
  }
}

TEST_CASE("concavity constants bracket the spectrum of -D^2 h") {
  for (const ConvexDomain& dom : sample_domains()) {
    CAPTURE(to_string(dom.kind()));
    CHECK(dom.theta() > 0.0);
    CHECK(dom.theta() <= dom.Theta());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver{
        Eigen::MatrixXd(-dom.hessian(dom.center()))};
    CHECK(solver.eigenvalues().minCoeff() >= dom.theta() - 1e-12);
    CHECK(solver.eigenvalues().maxCoeff() <= dom.Theta() + 1e-12);
  }
}

TEST_CASE("ball gradient has unit length on the boundary; max |Dh| is 1 for every kind") {
  for (const ConvexDomain& dom : sample_domains()) {
    CAPTURE(to_string(dom.kind()));
    double worst = 0.0;
    for (const Vec& b : dom.boundary_samples(2048)) {
      const double g = dom.gradient(b).norm();
      if (dom.kind() != DomainKind::ellipse) CHECK(g == doctest::Approx(1.0).epsilon(1e-12));
      worst = std::max(worst, g);
    }
    CHECK(worst == doctest::Approx(dom.grad_h_max()).epsilon(1e-5));
  }
}

TEST_CASE("finite differences of h match the analytic gradient") {
  Rng rng(12);
  const double step = 1e-5;
  for (const ConvexDomain& dom : sample_domains()) {
    CAPTURE(to_string(dom.kind()));
    for (int k = 0; k < 100; ++k) {
      const Vec p = interior_point(dom, rng);
      const Vec g = dom.gradient(p);
      for (int axis = 0; axis < dom.dim(); ++axis) {
        Vec e = Vec::Zero(dom.dim());
        e(axis) = step;
        const double fd = (dom.value(p + e) - dom.value(p - e)) / (2.0 * step);
        CHECK(std::abs(fd - g(axis)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("along_line reproduces h on the line") {
  Rng rng(13);
  for (const ConvexDomain& dom : sample_domains()) {
    for (int k = 0; k < 50; ++k) {
      const Vec p0 = interior_point(dom, rng);
      const Vec dir = rng.vec(dom.dim(), -1.0, 1.0);
      const auto c = dom.along_line(p0, dir);
      const double v = rng.uniform(-2.0, 2.0);
      CHECK(c[0] + c[1] * v + c[2] * v * v ==
            doctest::Approx(dom.value(p0 + v * dir)).epsilon(1e-12));
    }
  }
}

TEST_CASE("quadratic map sends the boundary onto the target boundary") {
  Rng rng(14);
  const std::vector<std::pair<ConvexDomain, ConvexDomain>> pairs = {
      {ConvexDomain::ball(make_vec(0.0, 0.0), 1.0), ConvexDomain::ball(make_vec(0.0, 0.0), 0.5)},
      {ConvexDomain::ellipse(make_vec(0.1, 0.0), make_mat(2.0, 0.5, 1.0)),
       ConvexDomain::ball(make_vec(0.3, -0.1), 0.7)},
      {ConvexDomain::ball(make_vec(0.0, 0.0), 1.0),
       ConvexDomain::ellipse(make_vec(0.0, 0.2), make_mat(3.0, -0.8, 1.5))},
      {ConvexDomain::interval(0.0, 1.0), ConvexDomain::interval(-1.0, 1.0)},
  };
  for (const auto& [omega, target] : pairs) {
    const Mat a = quadratic_initial_map(omega, target);
    CHECK((a - a.transpose()).norm() < 1e-14);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver{Eigen::MatrixXd(a)};
    CHECK(solver.eigenvalues().minCoeff() > 0.0);
    for (int k = 0; k < 100; ++k) {
      const Vec x = omega.boundary_point(rng.uniform(0.0, 2.0 * kPi));
      const Vec image = a * (x - omega.center()) + target.center();
      CHECK(std::abs(target.value(image)) <= 1e-8);
    }
  }
}
