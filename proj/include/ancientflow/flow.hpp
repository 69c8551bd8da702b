#pragma once
#include <limits>
#include <utility>
#include <vector>

#include "ancientflow/support.hpp"

namespace af {

enum class Gauge { Raw, Normalized };

struct FlowOptions {
  double tol = 1e-8;            // step-doubling error target, sup norm
  double dt_init = 1e-4;
  double t_start = 0.0;
  double snapshot_interval = 0.1;
  std::vector<double> output_times;  // extra absolute snapshot times
  bool track_entropy = false;
};

struct FlowTrajectory {
  Gauge gauge = Gauge::Normalized;
  std::vector<double> times;
  std::vector<SupportFunction> snapshots;
  std::vector<double> entropy_series;  // filled when tracking was requested
  long accepted = 0;
  long rejected = 0;
  double min_radius = std::numeric_limits<double>::infinity();
};

struct EntropySeries {
  VectorXd values;
  bool nonincreasing = false;  // within 1e-8 slack
};

// One linearly implicit step of the normalized equation
// u_tau = -(u'' + u)^(-alpha) + u.
SupportFunction step_normalized(const SupportFunction& u, double dtau);

// Same scheme for the unrescaled equation u_t = -(u'' + u)^(-alpha).
SupportFunction step_raw(const SupportFunction& u, double dt);

// Adaptive trajectory from opts.t_start to t_end with step doubling.
FlowTrajectory evolve(const SupportFunction& u0, Gauge gauge, double t_end,
                      const FlowOptions& opts = {});

// Switch gauges: returns the converted support function and its time label.
// Raw times are negative (extinction at 0); tau = 0 pairs with t = -1.
std::pair<SupportFunction, double> gauge_convert(const SupportFunction& u, Gauge to, double time);

EntropySeries entropy_along(const FlowTrajectory& traj);

}  // namespace af
