#include "ancientflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/LU>

#include "ancientflow/entropy.hpp"
#include "ancientflow/errors.hpp"
#include "ancientflow/grid.hpp"

namespace af {

namespace {

VectorXd radius_of(const SupportFunction& u) {
  return cached_diff(u.N(), 2) * u.samples + u.samples;
}

VectorXd flow_rhs(const SupportFunction& u, bool normalized) {
  VectorXd r = radius_of(u);
  VectorXd f = -r.array().pow(-u.alpha);
  if (normalized) f += u.samples;
  return f;
}

// Linearly implicit Euler: solve (I - dt J) w = dt f(u) with the Jacobian of
// the stiff part, J = diag(alpha r^(-alpha-1)) (D2 + I) [+ I in the
// normalized gauge], and return u + w.
SupportFunction rosenbrock_step(const SupportFunction& u, double dt, bool normalized) {
  if (!(dt > 0.0)) throw DomainError("step: time increment must be positive");
  const int N = u.N();
  VectorXd r = radius_of(u);
  if (r.minCoeff() <= kConvexityEps) throw DomainError("step: input violates convexity");
  VectorXd c = u.alpha * r.array().pow(-u.alpha - 1.0);
  VectorXd f = -r.array().pow(-u.alpha);
  if (normalized) f += u.samples;

  const MatrixXd& D2 = cached_diff(N, 2);
  MatrixXd M = -dt * (c.asDiagonal() * D2);
  M.diagonal() -= dt * c;
  if (normalized) M.diagonal().array() -= dt;
  M.diagonal().array() += 1.0;
  VectorXd w = Eigen::PartialPivLU<MatrixXd>(M).solve(dt * f);
  if (!w.allFinite()) throw LinearSolveFailure("step: implicit solve produced non-finite update");

  SupportFunction out{u.alpha, u.samples + w};
  VectorXd rout = radius_of(out);
  if (rout.minCoeff() <= kConvexityEps) throw ConvexityLost("step: convexity lost");
  return out;
}

}  // namespace

SupportFunction step_normalized(const SupportFunction& u, double dtau) {
  return rosenbrock_step(u, dtau, true);
}

SupportFunction step_raw(const SupportFunction& u, double dt) {
  return rosenbrock_step(u, dt, false);
}

FlowTrajectory evolve(const SupportFunction& u0, Gauge gauge, double t_end,
                      const FlowOptions& opts) {
  const bool normalized = (gauge == Gauge::Normalized);
  if (!(t_end > opts.t_start)) throw DomainError("evolve: end time must exceed start time");
  if (!(opts.tol > 0.0)) throw DomainError("evolve: tolerance must be positive");

  // Output schedule: start, every snapshot_interval, explicit extras, end.
  std::set<double> due{opts.t_start, t_end};
  if (opts.snapshot_interval > 0.0)
    for (double s = opts.t_start + opts.snapshot_interval; s < t_end;
         s += opts.snapshot_interval)
      due.insert(s);
  for (double s : opts.output_times)
    if (s > opts.t_start && s <= t_end) due.insert(s);

  FlowTrajectory traj;
  traj.gauge = gauge;
  auto emit = [&](double t, const SupportFunction& u) {
    traj.times.push_back(t);
    traj.snapshots.push_back(u);
    if (opts.track_entropy) traj.entropy_series.push_back(entropy(u).value);
  };

  SupportFunction u = u0;
  double t = opts.t_start;
  traj.min_radius = radius_of(u).minCoeff();
  emit(t, u);
  due.erase(due.begin());

  double dt = std::min(opts.dt_init, t_end - t);
  int consecutive_rejects = 0;
  while (t < t_end - 1e-13 * std::max(1.0, std::abs(t_end))) {
    dt = std::min(dt, t_end - t);
    if (!(dt > 1e-14 * std::max(1.0, std::abs(t))))
      throw IntegrationFailed("evolve: step size underflow");

    SupportFunction full{u.alpha, u.samples}, half2{u.alpha, u.samples};
    bool stepped = false;
    try {
      full = rosenbrock_step(u, dt, normalized);
      SupportFunction half1 = rosenbrock_step(u, 0.5 * dt, normalized);
      half2 = rosenbrock_step(half1, 0.5 * dt, normalized);
      stepped = true;
    } catch (const ConvexityLost&) {
      if (++consecutive_rejects > 40) throw;
    }

    double est = stepped
                     ? (half2.samples - full.samples).cwiseAbs().maxCoeff()
                     : std::numeric_limits<double>::infinity();
    SupportFunction next{u.alpha, u.samples};
    if (stepped && est <= opts.tol) {
      // local extrapolation of the doubled step
      next.samples = 2.0 * half2.samples - full.samples;
      if (radius_of(next).minCoeff() <= kConvexityEps) {
        stepped = false;
        if (++consecutive_rejects > 40)
          throw ConvexityLost("evolve: extrapolated state violates convexity");
      }
    }

    if (stepped && est <= opts.tol) {
      consecutive_rejects = 0;
      ++traj.accepted;
      double t_next = t + dt;
      VectorXd f0 = flow_rhs(u, normalized), f1 = flow_rhs(next, normalized);
      while (!due.empty() && *due.begin() <= t_next + 1e-13 * std::max(1.0, std::abs(t_next))) {
        double s = *due.begin();
        due.erase(due.begin());
        double sg = std::clamp((s - t) / dt, 0.0, 1.0);
        double h00 = (1.0 + 2.0 * sg) * (1.0 - sg) * (1.0 - sg);
        double h10 = sg * (1.0 - sg) * (1.0 - sg);
        double h01 = sg * sg * (3.0 - 2.0 * sg);
        double h11 = sg * sg * (sg - 1.0);
        VectorXd us = h00 * u.samples + h10 * dt * f0 + h01 * next.samples + h11 * dt * f1;
        emit(s, make_support(u.alpha, us));
      }
      u = next;
      t = t_next;
      double rmin = radius_of(u).minCoeff();
      traj.min_radius = std::min(traj.min_radius, rmin);
      // Collapse detection: once the curvature radius drops to 1e-4 the
      // adaptive step is about to underflow anyway; report extinction while
      // the state is still well conditioned.
      if (!normalized && (u.samples.minCoeff() <= 0.0 || rmin < 1e-4))
        throw Extinction("evolve: curve is collapsing in the raw gauge");
      double fac = est > 0.0 ? 0.9 * std::sqrt(opts.tol / est) : 5.0;
      dt *= std::clamp(fac, 0.2, 5.0);
    } else {
      ++traj.rejected;
      if (stepped) {
        ++consecutive_rejects;
        dt *= std::max(0.1, 0.9 * std::sqrt(opts.tol / est));
      } else {
        dt *= 0.5;
      }
    }
  }
  return traj;
}

std::pair<SupportFunction, double> gauge_convert(const SupportFunction& u, Gauge to, double time) {
  const double a1 = 1.0 + u.alpha;
  if (to == Gauge::Normalized) {
    if (time >= 0.0)
      throw DomainError("gauge_convert: raw time must be negative (extinction at 0)");
    double tau = -std::log(-time) / a1;
    double factor = std::pow(a1, -1.0 / a1) * std::exp(tau);
    return {make_support(u.alpha, factor * u.samples), tau};
  }
  double t = -std::exp(-a1 * time);
  double factor = std::pow(a1, 1.0 / a1) * std::exp(-time);
  return {make_support(u.alpha, factor * u.samples), t};
}

EntropySeries entropy_along(const FlowTrajectory& traj) {
  EntropySeries out;
  out.values.resize(traj.snapshots.size());
  for (size_t i = 0; i < traj.snapshots.size(); ++i)
    out.values[i] = entropy(traj.snapshots[i]).value;
  out.nonincreasing = true;
  for (int i = 0; i + 1 < out.values.size(); ++i)
    if (out.values[i + 1] > out.values[i] + 1e-8) out.nonincreasing = false;
  return out;
}

}  // namespace af
