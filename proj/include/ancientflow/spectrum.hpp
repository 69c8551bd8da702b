#pragma once
#include <string>
#include <vector>

#include "ancientflow/shrinker.hpp"

namespace af {

// Weighted discretization of the stability operator on the periodic grid:
// A = (2*pi/N) * [alpha (D2 + I) + diag(h^(-1-1/alpha))], W the weight part.
// Eigenpairs of A phi = -lambda W phi match the operator's spectrum with the
// sign convention that lambda_1 = -1-alpha is the lowest eigenvalue.
struct DiscretizedOperator {
  MatrixXd A;
  VectorXd W;  // diagonal entries
  double alpha = 0.0;
  int k = 0;
  int N = 0;
  SupportFunction h;  // profile resampled onto this grid
};

struct SpectralDecomposition {
  VectorXd lambda;  // m lowest eigenvalues, nondecreasing
  MatrixXd phi;     // N x m, weight-orthonormal, deterministic phase
  std::vector<std::vector<int>> clusters;  // indices grouped by near-equal lambda
  std::vector<int> nodal_counts;
  int morse_index = 0;
  int kernel_dim = 0;
  VectorXd lambda_full;  // all N discrete eigenvalues (for expansions)
  MatrixXd phi_full;     // N x N full discrete basis
  DiscretizedOperator op;
};

enum class BoundaryCondition { DD, DN, ND, NN };

struct BoundaryEigenReport {
  BoundaryCondition bc;
  VectorXd mu;        // m lowest eigenvalues, strictly increasing
  VectorXd theta;     // finite-difference grid on [0, pi/k], endpoints included
  MatrixXd psi;       // grid values per eigenfunction (columns)
  std::vector<int> interior_zeros;
};

struct SpectrumCheckItem {
  std::string name;
  bool pass = false;
  bool asserted = true;  // informational items are reported but never failed
  std::string detail;
};

struct SpectrumReport {
  std::vector<SpectrumCheckItem> items;
  bool all_pass() const {
    for (const auto& it : items)
      if (it.asserted && !it.pass) return false;
    return true;
  }
};

DiscretizedOperator build_operator(const ShrinkerProfile& profile, int N);

SpectralDecomposition eigs(const DiscretizedOperator& op, int m);

int morse_index(const SpectralDecomposition& dec);

// Sign changes around the periodic grid; near-zero samples defer to their
// non-tiny neighbors.
int nodal_count(const VectorXd& phi);

BoundaryEigenReport boundary_eigs(const ShrinkerProfile& profile, BoundaryCondition bc, int m);

SpectrumReport verify_spectrum(const SpectralDecomposition& dec, const ShrinkerProfile& profile);

}  // namespace af
