#pragma once
#include <utility>

#include "ancientflow/support.hpp"

namespace af {

// Self-similar profile: h'' + h = h^(-1/alpha) on the periodic grid.
// k = 0 marks the round circle; k >= 3 the dihedral profiles.
struct ShrinkerProfile {
  double alpha = 0.0;
  int k = 0;
  SupportFunction h;
  double r_star = 1.0;          // height ratio max h / min h
  double residual = 0.0;        // sup |h'' + h - h^(-1/alpha)|
  Eigen::MatrixXd theta_table;  // (r, Theta) pairs visited by the root search
  bool circle() const { return k == 0; }
};

// Variation of the profile family with respect to the height ratio,
// solving eta'' + eta + (1/alpha) h^(-1-1/alpha) eta = 0 on [0, pi/k].
struct EtaProfile {
  VectorXd theta;
  VectorXd samples;
  VectorXd deriv;
  double eta0 = 0.0;
  double eta_end = 0.0;
  double etaprime_end = 0.0;
};

// Orbit endpoint heights (U_max, U_min) for height ratio r > 1, closed form.
std::pair<double, double> initial_height(double alpha, double r);

// r -> 1 limit of both endpoint heights.
double limit_height(double alpha);

// Potential with V'(w) = w - w^(-1/alpha); conserved along the height ODE
// together with (1/2) w'^2.
double height_potential(double alpha, double w);

// d/dr of the minimum endpoint height (closed form).
double min_height_slope(double alpha, double r);

// Integrate the height ODE from (U_max, 0) and sample (w, w') at the given
// angles in [0, max(at)]. Rows match `at`, columns are (w, w').
Eigen::MatrixXd height_orbit(double alpha, double r, const VectorXd& at);

// First theta > 0 where w' = 0 again: the half-oscillation angle Theta(alpha, r).
double period(double alpha, double r);

ShrinkerProfile circle_shrinker(double alpha, int N);

// k-fold symmetric profile, k >= 3, alpha in (0, 1/(k^2-1)).
ShrinkerProfile solve_shrinker(double alpha, int k, int N);

EtaProfile eta(const ShrinkerProfile& profile);

}  // namespace af
