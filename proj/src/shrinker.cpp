#include "ancientflow/shrinker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ancientflow/errors.hpp"
#include "ancientflow/ode45.hpp"

namespace af {

using std::numbers::pi;

namespace {

void check_alpha_r(double alpha, double r, const char* who) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw DomainError(std::string(who) + ": alpha must lie in (0, 1)");
  if (!(r > 1.0)) throw DomainError(std::string(who) + ": height ratio must exceed 1");
}

// q(r) = (1 - r^(1-1/alpha)) / (r^2 - 1), written to stay accurate near r = 1.
double ratio_q(double alpha, double r) {
  double s = r - 1.0;
  double num = -std::expm1((1.0 - 1.0 / alpha) * std::log1p(s));
  return num / (s * (s + 2.0));
}

double ratio_q_slope(double alpha, double r) {
  double den = r * r - 1.0;
  double num = -std::expm1((1.0 - 1.0 / alpha) * std::log1p(r - 1.0));
  double dnum = -(1.0 - 1.0 / alpha) * std::pow(r, -1.0 / alpha);
  return (dnum * den - num * 2.0 * r) / (den * den);
}

OdeRhs height_rhs(double alpha) {
  return [alpha](double, const VectorXd& y) {
    VectorXd dy(2);
    dy[0] = y[1];
    dy[1] = -y[0] + std::pow(y[0], -1.0 / alpha);
    return dy;
  };
}

OdeOptions orbit_options(double alpha) {
  OdeOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-15;
  o.h_max = std::min(0.05, pi / std::sqrt(1.0 + 1.0 / alpha) / 6.0);
  return o;
}

double fold_angle(int k, double theta) {
  double cell = 2.0 * pi / k;
  double s = std::fmod(theta, cell);
  if (s < 0) s += cell;
  return std::min(s, cell - s);
}

}  // namespace

std::pair<double, double> initial_height(double alpha, double r) {
  check_alpha_r(alpha, r, "initial_height");
  double beta = alpha / (alpha + 1.0);
  double c = 2.0 * alpha / (1.0 - alpha);
  double u_min = std::pow(c * ratio_q(alpha, r), beta);
  return {r * u_min, u_min};
}

double limit_height(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw DomainError("limit_height: alpha must lie in (0, 1)");
  return 1.0;
}

double height_potential(double alpha, double w) {
  if (!(w > 0.0)) throw DomainError("height_potential: height must be positive");
  return 0.5 * w * w + alpha / (1.0 - alpha) * std::pow(w, (alpha - 1.0) / alpha);
}

double min_height_slope(double alpha, double r) {
  check_alpha_r(alpha, r, "min_height_slope");
  double beta = alpha / (alpha + 1.0);
  double c = 2.0 * alpha / (1.0 - alpha);
  double q = ratio_q(alpha, r);
  double u_min = std::pow(c * q, beta);
  return u_min * beta * ratio_q_slope(alpha, r) / q;
}

Eigen::MatrixXd height_orbit(double alpha, double r, const VectorXd& at) {
  check_alpha_r(alpha, r, "height_orbit");
  if (at.size() == 0) return Eigen::MatrixXd(0, 2);
  double span = at.maxCoeff();
  if (at.minCoeff() < 0.0) throw DomainError("height_orbit: angles must be nonnegative");
  auto [u_max, u_min] = initial_height(alpha, r);
  (void)u_min;
  VectorXd y0(2);
  y0 << u_max, 0.0;
  Eigen::MatrixXd out(at.size(), 2);
  if (span == 0.0) {
    for (int i = 0; i < at.size(); ++i) out.row(i) = y0.transpose();
    return out;
  }
  OdeSolution sol = ode45(height_rhs(alpha), 0.0, span, y0, orbit_options(alpha));
  for (int i = 0; i < at.size(); ++i) out.row(i) = sol.eval(at[i]).transpose();
  return out;
}

double period(double alpha, double r) {
  check_alpha_r(alpha, r, "period");
  auto [u_max, u_min] = initial_height(alpha, r);
  VectorXd y0(2);
  y0 << u_max, 0.0;
  OdeEvent ev{[](double, const VectorXd& y) { return y[1]; }, +1};
  OdeSolution sol = ode45(height_rhs(alpha), 0.0, pi, y0, orbit_options(alpha), &ev);
  if (!sol.event_hit)
    throw IntegrationFailed("period: no return of w' to zero within (0, pi]");
  if (std::abs(sol.y_event[0] - u_min) > 1e-8)
    throw SolverFailure("period: orbit endpoint does not match the closed-form minimum height");
  return sol.t_event;
}

ShrinkerProfile circle_shrinker(double alpha, int N) {
  if (!(alpha > 0.0)) throw DomainError("circle_shrinker: alpha must be positive");
  ShrinkerProfile p;
  p.alpha = alpha;
  p.k = 0;
  p.h = make_support(alpha, VectorXd::Ones(N));
  p.r_star = 1.0;
  VectorXd res = differentiate(p.h, 2) + p.h.samples -
                 p.h.samples.array().pow(-1.0 / alpha).matrix();
  p.residual = res.cwiseAbs().maxCoeff();
  return p;
}

ShrinkerProfile solve_shrinker(double alpha, int k, int N) {
  if (k < 3) throw DomainError("solve_shrinker: fold symmetry must be at least 3");
  if (!(alpha > 0.0) || !(alpha < 1.0 / (k * k - 1)))
    throw DomainError("solve_shrinker: alpha must lie in (0, 1/(k^2-1))");
  const double target = pi / k;

  std::vector<std::pair<double, double>> table;
  auto theta_of = [&](double r) {
    double th = period(alpha, r);
    table.emplace_back(r, th);
    return th;
  };

  // Bracket the height ratio: near 1 the half-oscillation angle sits below
  // pi/k; grow the upper end geometrically until it crosses.
  double lo = 1.0 + 1e-8;
  if (theta_of(lo) >= target)
    throw RootNotBracketed("solve_shrinker: angle already above pi/k at the lower bracket");
  double hi = 2.0;
  for (;;) {
    bool above;
    try {
      above = theta_of(hi) > target;
    } catch (const IntegrationFailed&) {
      above = true;  // angle exceeded pi entirely
    }
    if (above) break;
    hi *= 2.0;
    if (hi > 1e6)
      throw RootNotBracketed("solve_shrinker: angle never reaches pi/k below ratio 1e6");
  }

  double r_star = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    r_star = 0.5 * (lo + hi);
    double th = theta_of(r_star);
    if (std::abs(th - target) < 1e-12) break;
    (th < target ? lo : hi) = r_star;
    if (hi - lo < 1e-15 * hi) break;
  }
  if (std::abs(period(alpha, r_star) - target) > 1e-10)
    throw SolverFailure("solve_shrinker: root polish did not reach the target angle");

  // Sample the orbit at the folded grid angles, then polish the samples to a
  // fixed point of the collocation equations so downstream operators see a
  // discrete solution rather than interpolated ODE output.
  VectorXd th_grid = theta_grid(N);
  VectorXd folded(N);
  for (int i = 0; i < N; ++i) folded[i] = std::min(fold_angle(k, th_grid[i]), target);
  Eigen::MatrixXd orbit = height_orbit(alpha, r_star, folded);
  VectorXd h = orbit.col(0);

  MatrixXd D1 = fourier_diff1(N);
  MatrixXd D2 = fourier_diff2(N);
  VectorXd g = D1 * h;
  g /= g.norm();
  auto resid = [&](const VectorXd& v) -> VectorXd {
    return D2 * v + v - v.array().pow(-1.0 / alpha).matrix();
  };
  // The plain Jacobian is singular along rotations; border it with the
  // rotation direction to pin the phase.
  for (int it = 0; it < 4; ++it) {
    VectorXd F = resid(h);
    if (F.cwiseAbs().maxCoeff() < 1e-13 * N) break;
    MatrixXd J = D2 + MatrixXd::Identity(N, N);
    J.diagonal() += (1.0 / alpha) * h.array().pow(-1.0 - 1.0 / alpha).matrix();
    MatrixXd M = MatrixXd::Zero(N + 1, N + 1);
    M.topLeftCorner(N, N) = J;
    M.topRightCorner(N, 1) = g;
    M.bottomLeftCorner(1, N) = g.transpose();
    VectorXd rhs(N + 1);
    rhs.head(N) = -F;
    rhs[N] = 0.0;
    VectorXd dh = Eigen::PartialPivLU<MatrixXd>(M).solve(rhs).head(N);
    if (!dh.allFinite()) throw LinearSolveFailure("solve_shrinker: polish solve failed");
    h += dh;
  }

  ShrinkerProfile p;
  p.alpha = alpha;
  p.k = k;
  p.h = make_support(alpha, h);
  p.r_star = r_star;
  p.residual = resid(h).cwiseAbs().maxCoeff();
  p.theta_table.resize(table.size(), 2);
  for (size_t i = 0; i < table.size(); ++i) {
    p.theta_table(i, 0) = table[i].first;
    p.theta_table(i, 1) = table[i].second;
  }
  if (p.residual >= 1e-9)
    throw SolverFailure("solve_shrinker: profile residual exceeds 1e-9");
  return p;
}

EtaProfile eta(const ShrinkerProfile& profile) {
  if (profile.circle()) throw DomainError("eta: requires a k-fold profile");
  const double alpha = profile.alpha;
  const double r = profile.r_star;
  const double end = pi / profile.k;
  auto [u_max, u_min] = initial_height(alpha, r);
  double eta0 = u_min + r * min_height_slope(alpha, r);

  OdeRhs rhs = [alpha](double, const VectorXd& y) {
    VectorXd dy(4);
    dy[0] = y[1];
    dy[1] = -y[0] + std::pow(y[0], -1.0 / alpha);
    dy[2] = y[3];
    dy[3] = -(1.0 + std::pow(y[0], -1.0 - 1.0 / alpha) / alpha) * y[2];
    return dy;
  };
  VectorXd y0(4);
  y0 << u_max, 0.0, eta0, 0.0;
  OdeSolution sol = ode45(rhs, 0.0, end, y0, orbit_options(alpha));

  const int M = 2048;
  EtaProfile out;
  out.theta.resize(M + 1);
  out.samples.resize(M + 1);
  out.deriv.resize(M + 1);
  for (int i = 0; i <= M; ++i) {
    out.theta[i] = end * i / M;
    VectorXd y = sol.eval(out.theta[i]);
    out.samples[i] = y[2];
    out.deriv[i] = y[3];
  }
  out.eta0 = eta0;
  out.eta_end = sol.y.back()[2];
  out.etaprime_end = sol.y.back()[3];
  if (!(out.eta0 > 0.0) || !(out.eta_end < 0.0) || !(out.etaprime_end < 0.0))
    throw SolverFailure("eta: endpoint signs violate the variational structure");
  return out;
}

}  // namespace af
