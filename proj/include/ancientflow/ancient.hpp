#pragma once
#include <vector>

#include "ancientflow/spectrum.hpp"

namespace af {

// Mode amplitudes for the unstable directions, paired with their eigenvalues
// so time shifting knows the decay rates.
struct CoefficientVector {
  VectorXd a;
  VectorXd lambda;
};

// Partition of the unstable modes into decay layers: layer l collects modes
// with (l+1)lambda_I < lambda_m <= l lambda_I, with per-layer rate delta_l
// strictly between the adjacent resonances.
struct LayerPartition {
  int L = 0;
  std::vector<std::vector<int>> J;  // zero-based mode indices per layer, J[l-1]
  VectorXd delta;                   // delta_l, size L
};

struct AncientLayer {
  std::vector<int> modes;
  double delta = 0.0;
  MatrixXd w;  // fixed-point correction on (theta, tau); empty when the layer is empty
  int iterations = 0;
  double final_change = 0.0;
};

struct AncientSolution {
  ShrinkerProfile profile;
  CoefficientVector a;
  VectorXd tau;  // uniform grid on [-T_max, tau0]
  LayerPartition partition;
  std::vector<AncientLayer> layers;
  MatrixXd v;  // total perturbation field, N x tau.size()
  double T_shift = 0.0;
  double pde_residual = 0.0;  // measured sup residual of the discrete equation
};

struct AncientOptions {
  double T_max = 0.0;  // 0 = default 40/(1+alpha)
  double tau0 = -1.0;
  double dtau = 1.0 / 128;
  double tol_fix = 1e-10;
  double epsilon0 = 1e-2;
  int max_iter = 50;
};

struct InhomSolution {
  MatrixXd v;
  bool decay_warning = false;  // forcing did not look bounded by C e^(delta tau)
};

struct LayerRate {
  int mode = 0;  // zero-based
  double slope = 0.0;
  double amplitude = 0.0;
  double a_recovered = 0.0;
};

// Quadratic error term of the perturbation equation about the profile:
// E(v) = -h (1 + h^(1/alpha)(v'' + v))^(-alpha) + h - alpha h^(1+1/alpha)(v'' + v).
// Requires sup |h^(1/alpha)(v'' + v)| < 1/2.
VectorXd nonlinearity_E(const ShrinkerProfile& profile, const VectorXd& v);
MatrixXd nonlinearity_E(const ShrinkerProfile& profile, const MatrixXd& v);

// E(v + dv) - E(v) in a single pass, with absolute error O(eps |dv|). Taking
// the difference of two nonlinearity_E calls leaves rounding noise of order
// eps |v| that does not decay with dv; the layered construction amplifies
// early-time forcing noise exponentially, so it needs this form.
MatrixXd nonlinearity_E_diff(const ShrinkerProfile& profile, const MatrixXd& v,
                             const MatrixXd& dv);

// Sum of decaying eigenmodes a_j e^(-lambda_j tau) phi_j over the subset J
// (zero-based indices), evaluated on the (theta, tau) grid.
MatrixXd linear_mode_ansatz(const SpectralDecomposition& dec, const CoefficientVector& a,
                            const std::vector<int>& J, const VectorXd& tau);

// One scalar Duhamel integral on a uniform grid with spacing dtau. Modes in J
// are anchored to vanish at the final grid point; modes outside J integrate
// from tau = -infinity with an exponential-tail closure of rate delta.
VectorXd mode_duhamel(const VectorXd& f, double lambda, bool in_J, double delta, double dtau);

// Solve d/dtau v = L v + f in the full discrete eigenbasis via mode_duhamel,
// with J = {j : lambda_j < -delta}.
InhomSolution solve_linear_inhom(const SpectralDecomposition& dec, const MatrixXd& f,
                                 double delta, const VectorXd& tau);

// Decay-layer partition of the given negative eigenvalues (ascending).
LayerPartition layer_partition(const VectorXd& lambda_neg);

// Layered contraction construction of the ancient solution with prescribed
// unstable-mode amplitudes. Requires |a| < opts.epsilon0.
AncientSolution construct_ancient(const ShrinkerProfile& profile, const SpectralDecomposition& dec,
                                  const CoefficientVector& a, const AncientOptions& opts = {});

// Smallest nonnegative shift T with sum a_m^2 exp(2 lambda_m T) < epsilon0,
// and the correspondingly damped amplitudes.
std::pair<CoefficientVector, double> time_shift(const CoefficientVector& a, double epsilon0);

// Amplitude shift induced by recentering the flow in space-time:
// (b1/(1+alpha), (1+alpha)^(-1/(alpha+1)) b2, same b3, 0, ...).
CoefficientVector recenter(const CoefficientVector& a, const Eigen::Vector3d& B, double alpha,
                           const SpectralDecomposition& dec, const ShrinkerProfile& profile);

// Fitted decay exponent and recovered amplitude per active mode.
std::vector<LayerRate> layer_rates(const AncientSolution& sol, const SpectralDecomposition& dec);

}  // namespace af
