#pragma once
#include <Eigen/Dense>

namespace af {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Shared numerical thresholds.
inline constexpr double kConvexityEps = 1e-8;   // min admissible curvature radius
inline constexpr double kEigTol = 1e-7;         // eigenvalue match tolerance
inline constexpr double kKernelTol = 1e-6;      // kernel / eigenvector tolerance

bool is_power_of_two(int n);

// Uniform periodic grid theta_i = 2*pi*i/N, i = 0..N-1.
VectorXd theta_grid(int N);

// Spectral differentiation matrices for 2*pi-periodic data on theta_grid(N).
// N must be even. D2 annihilates constants exactly by construction.
MatrixXd fourier_diff1(int N);
MatrixXd fourier_diff2(int N);

// Shared per-size cache of the above (order 1 or 2).
const MatrixXd& cached_diff(int N, int order);

// Trapezoid quadrature of periodic samples: (2*pi/N) * sum f_i.
double quad(const VectorXd& f);

// Fourier coefficients (1/pi)*integral f cos(m theta), same for sin.
double fourier_cos(const VectorXd& f, int m);
double fourier_sin(const VectorXd& f, int m);

// Evaluate the trigonometric interpolant of periodic samples f (on
// theta_grid(f.size())) at arbitrary angles. Direct DFT evaluation.
VectorXd trig_interp(const VectorXd& f, const VectorXd& at);

// Resample periodic data from its native grid onto theta_grid(M).
VectorXd trig_resample(const VectorXd& f, int M);

}  // namespace af
