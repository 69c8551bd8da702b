#include "ancientflow/support.hpp"

#include <cmath>
#include <numbers>

#include "ancientflow/errors.hpp"

namespace af {

using std::numbers::pi;

SupportFunction make_support(double alpha, const VectorXd& samples) {
  if (!(alpha > 0.0)) throw DomainError("make_support: alpha must be positive");
  const int N = static_cast<int>(samples.size());
  if (N < 16 || !is_power_of_two(N))
    throw DomainError("make_support: grid size must be a power of two, at least 16");
  if (!samples.allFinite()) throw DomainError("make_support: samples must be finite");
  SupportFunction u{alpha, samples};
  VectorXd r = cached_diff(N, 2) * samples + samples;
  // Admission tolerates flat sides: nearly polygonal bodies have curvature
  // radii far below the noise of the spectral second derivative, so only
  // clear sign violations are rejected here. Consumers that invert the
  // radius (curvature, flow steps) enforce strict positivity themselves.
  double floor = -1e-9 * std::max(1.0, samples.cwiseAbs().maxCoeff());
  if (r.minCoeff() <= floor)
    throw DomainError("make_support: curve is not strictly convex");
  return u;
}

VectorXd differentiate(const SupportFunction& u, int order) {
  if (order != 1 && order != 2) throw DomainError("differentiate: order must be 1 or 2");
  return cached_diff(u.N(), order) * u.samples;
}

CurvatureProfile curvature(const SupportFunction& u) {
  CurvatureProfile c;
  c.radius = differentiate(u, 2) + u.samples;
  if (c.radius.minCoeff() <= 0.0) throw DomainError("curvature: curve is not convex");
  c.kappa = c.radius.cwiseInverse();
  return c;
}

double area(const SupportFunction& u) {
  VectorXd du = differentiate(u, 1);
  return 0.5 * quad((u.samples.array().square() - du.array().square()).matrix());
}

double length(const SupportFunction& u) { return quad(u.samples); }

Eigen::MatrixXd boundary_points(const SupportFunction& u) {
  const int N = u.N();
  VectorXd th = theta_grid(N);
  VectorXd du = differentiate(u, 1);
  Eigen::MatrixXd X(N, 2);
  for (int i = 0; i < N; ++i) {
    double c = std::cos(th[i]), s = std::sin(th[i]);
    X(i, 0) = u.samples[i] * c - du[i] * s;
    X(i, 1) = u.samples[i] * s + du[i] * c;
  }
  return X;
}

Vector2d steiner_point(const SupportFunction& u) {
  return {fourier_cos(u.samples, 1), fourier_sin(u.samples, 1)};
}

Vector2d centroid(const SupportFunction& u) {
  const int N = u.N();
  VectorXd th = theta_grid(N);
  VectorXd r = differentiate(u, 2) + u.samples;
  Eigen::MatrixXd X = boundary_points(u);
  // Green's theorem moments: int x dA = (1/2) oint x^2 dy, int y dA = -(1/2) oint y^2 dx,
  // with dX/dtheta = (u'' + u) (-sin, cos).
  VectorXd fx(N), fy(N);
  for (int i = 0; i < N; ++i) {
    double c = std::cos(th[i]), s = std::sin(th[i]);
    fx[i] = 0.5 * X(i, 0) * X(i, 0) * r[i] * c;
    fy[i] = 0.5 * X(i, 1) * X(i, 1) * r[i] * s;
  }
  double A = area(u);
  if (A <= 0.0) throw DomainError("centroid: enclosed area must be positive");
  return {quad(fx) / A, quad(fy) / A};
}

VectorXd translate_samples(const SupportFunction& u, const Vector2d& z) {
  const int N = u.N();
  VectorXd th = theta_grid(N), out(N);
  for (int i = 0; i < N; ++i) out[i] = u.samples[i] - z.x() * std::cos(th[i]) - z.y() * std::sin(th[i]);
  return out;
}

bool contains(const SupportFunction& u, const Vector2d& z) {
  return translate_samples(u, z).minCoeff() > 0.0;
}

VectorXd h_weight(const SupportFunction& h) {
  if (h.samples.minCoeff() <= 0.0) throw DomainError("h_weight: samples must be positive");
  return h.samples.array().pow(-1.0 - 1.0 / h.alpha).matrix();
}

double inner_h(const VectorXd& f, const VectorXd& g, const SupportFunction& h) {
  if (f.size() != g.size() || f.size() != h.samples.size())
    throw DomainError("inner_h: size mismatch");
  return quad((f.array() * g.array() * h_weight(h).array()).matrix());
}

}  // namespace af
