#pragma once
#include <Eigen/Dense>

#include "ancientflow/grid.hpp"

namespace af {

using Eigen::Vector2d;

// Convex curve given by its support function u(theta) sampled on the uniform
// periodic grid theta_grid(N). alpha tags the flow exponent the curve is
// used with; it rides along so weighted inner products know the weight.
struct SupportFunction {
  double alpha = 1.0;
  VectorXd samples;
  int N() const { return static_cast<int>(samples.size()); }
};

// Curvature data along the curve: radius = u'' + u, kappa = 1/radius.
struct CurvatureProfile {
  VectorXd radius;
  VectorXd kappa;
};

// Validates grid size (power of two, >= 16) and strict convexity.
SupportFunction make_support(double alpha, const VectorXd& samples);

// Spectral derivative of the sample vector, order 1 or 2.
VectorXd differentiate(const SupportFunction& u, int order);

CurvatureProfile curvature(const SupportFunction& u);

// Enclosed area (1/2) integral (u^2 - u_theta^2).
double area(const SupportFunction& u);

// Boundary length, integral of u.
double length(const SupportFunction& u);

// Boundary parametrization X(theta) = u e(theta) + u_theta e'(theta), N x 2.
Eigen::MatrixXd boundary_points(const SupportFunction& u);

// Steiner point (1/pi) integral u e(theta).
Vector2d steiner_point(const SupportFunction& u);

// Area centroid of the enclosed region.
Vector2d centroid(const SupportFunction& u);

// Support samples of the same body translated by -z, i.e. measured from
// base point z: u_z(theta) = u(theta) - z . e(theta).
VectorXd translate_samples(const SupportFunction& u, const Vector2d& z);

// True if z lies in the open region bounded by the curve (u_z > 0 everywhere).
bool contains(const SupportFunction& u, const Vector2d& z);

// Weight h^(-1-1/alpha) defining the shrinker inner product.
VectorXd h_weight(const SupportFunction& h);

// Weighted inner product integral f g h^(-1-1/alpha) dtheta (trapezoid).
double inner_h(const VectorXd& f, const VectorXd& g, const SupportFunction& h);

}  // namespace af
