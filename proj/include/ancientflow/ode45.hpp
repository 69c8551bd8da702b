#pragma once
#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace af {

using Eigen::VectorXd;
using OdeRhs = std::function<VectorXd(double, const VectorXd&)>;

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 = choose automatically
  double h_max = 0.0;   // 0 = unrestricted
  long max_steps = 2000000;
};

// Scalar event g(t, y); integration stops at the first accepted step whose
// endpoints bracket a zero of g in the requested direction (+1 means g goes
// from negative to nonnegative), then the crossing is located by bisection
// on the dense output.
struct OdeEvent {
  std::function<double(double, const VectorXd&)> g;
  int direction = 1;
};

// Dormand-Prince 5(4) trajectory with per-step stage storage so the solution
// can be evaluated anywhere in the integration span.
struct OdeSolution {
  std::vector<double> t;                       // accepted nodes, increasing
  std::vector<VectorXd> y;                     // states at nodes
  std::vector<std::array<VectorXd, 7>> stage;  // stages per interval
  std::vector<double> hstep;                   // interval widths

  bool event_hit = false;
  double t_event = 0.0;
  VectorXd y_event;

  VectorXd eval(double tq) const;
  double eval_component(double tq, int comp) const;
};

OdeSolution ode45(const OdeRhs& f, double t0, double t1, const VectorXd& y0,
                  const OdeOptions& opts = {}, const OdeEvent* event = nullptr);

}  // namespace af
