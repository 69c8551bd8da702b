#include <doctest.h>

#include <ancientflow/errors.hpp>
#include <ancientflow/grid.hpp>
#include <ancientflow/support.hpp>

#include <cmath>

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

constexpr double kPi = 3.14159265358979323846;

af::SupportFunction body(double alpha, int n, double (*f)(double)) {
  VectorXd g = af::theta_grid(n);
  VectorXd u(n);
  for (int i = 0; i < n; ++i) u[i] = f(g[i]);
  return af::make_support(alpha, u);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("circle closed forms") {
  const int n = 128;
  af::SupportFunction u = af::make_support(1.0, VectorXd::Constant(n, 2.5));
  CHECK(af::area(u) == doctest::Approx(kPi * 2.5 * 2.5).epsilon(1e-13));
  CHECK(af::length(u) == doctest::Approx(2.0 * kPi * 2.5).epsilon(1e-13));
  af::CurvatureProfile c = af::curvature(u);
  for (int i = 0; i < n; ++i) {
    CHECK(c.kappa[i] == doctest::Approx(1.0 / 2.5).epsilon(1e-12));
    CHECK(c.radius[i] == doctest::Approx(2.5).epsilon(1e-12));
  }
  CHECK(af::steiner_point(u).norm() < 1e-12);
  CHECK(af::centroid(u).norm() < 1e-12);
}

TEST_CASE("translated circle keeps shape functionals and reports its center") {
  // support function of the unit circle centered at (0.3, -0.2)
  af::SupportFunction u = body(0.5, 128, +[](double t) { return 1.0 + 0.3 * std::cos(t) - 0.2 * std::sin(t); });
  CHECK(af::area(u) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(af::length(u) == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  Vector2d want(0.3, -0.2);
  CHECK((af::steiner_point(u) - want).norm() < 1e-12);
  CHECK((af::centroid(u) - want).norm() < 1e-10);
  CHECK(af::contains(u, want));
  CHECK(af::contains(u, Vector2d(1.2, -0.2)));
  CHECK_FALSE(af::contains(u, Vector2d(1.4, -0.2)));
}

TEST_CASE("boundary points trace the curve and match the shoelace area") {
  af::SupportFunction u = body(1.0, 256, +[](double t) { return 1.0 + 0.1 * std::cos(2.0 * t); });
  MatrixXd p = af::boundary_points(u);
  REQUIRE(p.rows() == 256);
  REQUIRE(p.cols() == 2);
  double shoelace = 0.0;
  for (int i = 0; i < 256; ++i) {
    int j = (i + 1) % 256;
    shoelace += p(i, 0) * p(j, 1) - p(j, 0) * p(i, 1);
  }
  shoelace *= 0.5;
  // the inscribed polygon undershoots the smooth area at O(h^2), h = 2pi/256
  CHECK(shoelace == doctest::Approx(af::area(u)).epsilon(1e-3));
  CHECK(shoelace < af::area(u));
}

TEST_CASE("derivatives of the support function match closed forms") {
  const int n = 128;
  af::SupportFunction u = body(1.0, n, +[](double t) { return 1.0 + 0.1 * std::cos(2.0 * t); });
  VectorXd g = af::theta_grid(n);
  VectorXd d1 = af::differentiate(u, 1);
  VectorXd d2 = af::differentiate(u, 2);
  for (int i = 0; i < n; ++i) {
    CHECK(d1[i] == doctest::Approx(-0.2 * std::sin(2.0 * g[i])).scale(1.0).epsilon(1e-11));
    CHECK(d2[i] == doctest::Approx(-0.4 * std::cos(2.0 * g[i])).scale(1.0).epsilon(1e-11));
  }
  af::CurvatureProfile c = af::curvature(u);
  for (int i = 0; i < n; ++i) {
    double r = 1.0 - 0.3 * std::cos(2.0 * g[i]);
    CHECK(c.kappa[i] == doctest::Approx(1.0 / r).epsilon(1e-10));
  }
  CHECK_THROWS_AS(af::differentiate(u, 3), af::DomainError);
}

TEST_CASE("rebasing the support function moves the body rigidly") {
  af::SupportFunction u = body(0.25, 64, +[](double t) { return 1.0 + 0.05 * std::cos(3.0 * t); });
  // measuring from base point z shifts the body by -z
  Vector2d z(0.4, -0.15);
  af::SupportFunction v = af::make_support(u.alpha, af::translate_samples(u, z));
  CHECK(af::area(v) == doctest::Approx(af::area(u)).epsilon(1e-12));
  CHECK(af::length(v) == doctest::Approx(af::length(u)).epsilon(1e-12));
  CHECK((af::steiner_point(v) - af::steiner_point(u) + z).norm() < 1e-12);
  MatrixXd pu = af::boundary_points(u);
  MatrixXd pv = af::boundary_points(v);
  CHECK((pv.col(0).array() - pu.col(0).array() + z[0]).abs().maxCoeff() < 1e-12);
  CHECK((pv.col(1).array() - pu.col(1).array() + z[1]).abs().maxCoeff() < 1e-12);
  // undo
  VectorXd back = af::translate_samples(v, -z);
  CHECK((back - u.samples).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("invalid bodies are rejected") {
  // not a power of two
  CHECK_THROWS_AS(af::make_support(1.0, VectorXd::Constant(100, 1.0)), af::DomainError);
  // curvature radius goes negative: u'' + u = 1 - 3 cos(2t)
  VectorXd g = af::theta_grid(64);
  VectorXd bad(64);
  for (int i = 0; i < 64; ++i) bad[i] = 1.0 + std::cos(2.0 * g[i]);
  CHECK_THROWS_AS(af::make_support(1.0, bad), af::DomainError);
  // exponent must be positive
  CHECK_THROWS_AS(af::make_support(0.0, VectorXd::Ones(64)), af::DomainError);
  CHECK_THROWS_AS(af::make_support(-0.5, VectorXd::Ones(64)), af::DomainError);
}

TEST_CASE("weighted inner product reduces to the plain one on the circle") {
  const int n = 64;
  af::SupportFunction h = af::make_support(0.5, VectorXd::Ones(n));
  VectorXd g = af::theta_grid(n);
  VectorXd f1(n), f2(n);
  for (int i = 0; i < n; ++i) {
    f1[i] = std::cos(g[i]);
    f2[i] = std::sin(g[i]);
  }
  // h == 1 so the weight h^{-1-1/alpha} == 1
  CHECK(af::inner_h(f1, f1, h) == doctest::Approx(kPi).epsilon(1e-13));
  CHECK(af::inner_h(f1, f2, h) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  VectorXd w = af::h_weight(h);
  CHECK((w.array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("weight scales as a power of the body") {
  const int n = 64;
  double alpha = 0.5;
  af::SupportFunction h = af::make_support(alpha, VectorXd::Constant(n, 2.0));
  VectorXd w = af::h_weight(h);
  double want = std::pow(2.0, -1.0 - 1.0 / alpha);
  CHECK((w.array() - want).abs().maxCoeff() < 1e-14);
}

}  // TEST_SUITE
