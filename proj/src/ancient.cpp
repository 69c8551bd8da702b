#include "ancientflow/ancient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ancientflow/errors.hpp"
#include "ancientflow/grid.hpp"

namespace af {

namespace {

// g(x) = -alpha x - ((1+x)^(-alpha) - 1), the quadratic remainder of the
// curvature nonlinearity. Stable for x near 0 via expm1/log1p.
double remainder_g(double alpha, double x) {
  return -alpha * x - std::expm1(-alpha * std::log1p(x));
}

// g(x+dx) - g(x) with absolute error O(eps |dx|): the power-law difference is
// routed through expm1(log1p(dx/(1+x))) so the near-equal terms cancel
// analytically instead of in floating point. Differencing two remainder_g
// calls leaves noise of order eps |x| that does not shrink with dx.
double remainder_g_diff(double alpha, double x, double dx) {
  double p = std::exp(-alpha * std::log1p(x));
  return -alpha * dx - p * std::expm1(-alpha * std::log1p(dx / (1.0 + x)));
}

void check_argument(double x) {
  if (!(std::abs(x) < 0.5))
    throw OutOfRange("nonlinearity argument |h^(1/alpha)(v''+v)| reached " +
                     std::to_string(std::abs(x)) + "; expansion requires < 1/2");
}

// exp-weighted panel integrals over one step of length dtau:
//   phi1 = int_0^d e^(lambda s) ds,           phi2 = int_0^d e^(lambda s) s/d ds
//   psi1 = int_0^d e^(lambda (s-d)) ds,       psi2 = int_0^d e^(lambda (s-d)) s/d ds
// Series branches keep full accuracy for small |lambda| dtau.
void panel_phi(double z, double d, double& phi1, double& phi2) {
  if (std::abs(z) < 1e-3) {
    phi1 = d * (1.0 + z / 2 + z * z / 6 + z * z * z / 24);
    phi2 = d * (0.5 + z / 3 + z * z / 8 + z * z * z / 30);
  } else {
    double ez = std::exp(z);
    phi1 = d * (ez - 1.0) / z;
    phi2 = d * (ez * (z - 1.0) + 1.0) / (z * z);
  }
}

void panel_psi(double z, double d, double& psi1, double& psi2) {
  if (std::abs(z) < 1e-3) {
    psi1 = d * (1.0 - z / 2 + z * z / 6 - z * z * z / 24);
    psi2 = d * (0.5 - z / 3 + z * z / 24 - z * z * z / 120);
  } else {
    double emz = std::exp(-z);
    psi1 = d * (1.0 - emz) / z;
    psi2 = d * (z - 1.0 + emz) / (z * z);
  }
}

}  // namespace

VectorXd nonlinearity_E(const ShrinkerProfile& profile, const VectorXd& v) {
  const int n = static_cast<int>(profile.h.samples.size());
  if (v.size() != n) throw DomainError("nonlinearity_E: sample count does not match profile");
  const MatrixXd& D2 = cached_diff(n, 2);
  VectorXd x = (D2 * v + v).array() * profile.h.samples.array().pow(1.0 / profile.alpha);
  VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    check_argument(x[i]);
    out[i] = profile.h.samples[i] * remainder_g(profile.alpha, x[i]);
  }
  return out;
}

MatrixXd nonlinearity_E(const ShrinkerProfile& profile, const MatrixXd& v) {
  const int n = static_cast<int>(profile.h.samples.size());
  if (v.rows() != n) throw DomainError("nonlinearity_E: sample count does not match profile");
  const MatrixXd& D2 = cached_diff(n, 2);
  VectorXd hpow = profile.h.samples.array().pow(1.0 / profile.alpha);
  MatrixXd x = D2 * v + v;
  MatrixXd out(n, v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c)
    for (int i = 0; i < n; ++i) {
      double xi = hpow[i] * x(i, c);
      check_argument(xi);
      out(i, c) = profile.h.samples[i] * remainder_g(profile.alpha, xi);
    }
  return out;
}

MatrixXd nonlinearity_E_diff(const ShrinkerProfile& profile, const MatrixXd& v,
                             const MatrixXd& dv) {
  const int n = static_cast<int>(profile.h.samples.size());
  if (v.rows() != n || dv.rows() != n || v.cols() != dv.cols())
    throw DomainError("nonlinearity_E_diff: field shapes do not match the profile");
  const MatrixXd& D2 = cached_diff(n, 2);
  VectorXd hpow = profile.h.samples.array().pow(1.0 / profile.alpha);
  MatrixXd x = D2 * v + v;
  MatrixXd dx = D2 * dv + dv;
  MatrixXd out(n, v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c)
    for (int i = 0; i < n; ++i) {
      double xi = hpow[i] * x(i, c);
      double dxi = hpow[i] * dx(i, c);
      check_argument(xi);
      check_argument(xi + dxi);
      out(i, c) = profile.h.samples[i] * remainder_g_diff(profile.alpha, xi, dxi);
    }
  return out;
}

MatrixXd linear_mode_ansatz(const SpectralDecomposition& dec, const CoefficientVector& a,
                            const std::vector<int>& J, const VectorXd& tau) {
  const int n = static_cast<int>(dec.phi.rows());
  MatrixXd out = MatrixXd::Zero(n, tau.size());
  for (int j : J) {
    if (j < 0 || j >= a.a.size() || j >= dec.lambda.size())
      throw DomainError("linear_mode_ansatz: mode index out of range");
    if (a.a[j] == 0.0) continue;
    VectorXd decay = (-dec.lambda[j] * tau.array()).exp();
    out.noalias() += (a.a[j] * dec.phi.col(j)) * decay.transpose();
  }
  return out;
}

VectorXd mode_duhamel(const VectorXd& f, double lambda, bool in_J, double delta, double dtau) {
  const Eigen::Index n = f.size();
  if (n < 2) throw DomainError("mode_duhamel: need at least two samples");
  if (!(dtau > 0)) throw DomainError("mode_duhamel: dtau must be positive");
  const double z = lambda * dtau;
  VectorXd u(n);
  if (in_J) {
    // u(tau) = int_{tau_end}^{tau} e^(lambda (s - tau)) f ds, anchored u = 0 at
    // the last node. Backward recurrence for G = -u is contractive (lambda < 0).
    double phi1, phi2;
    panel_phi(z, dtau, phi1, phi2);
    const double fac = std::exp(z);
    double G = 0.0;
    u[n - 1] = 0.0;
    for (Eigen::Index i = n - 2; i >= 0; --i) {
      G = f[i] * phi1 + (f[i + 1] - f[i]) * phi2 + fac * G;
      u[i] = -G;
    }
  } else {
    if (std::abs(lambda + delta) < 1e-8)
      throw ResonanceError("mode_duhamel: eigenvalue within 1e-8 of -delta");
    if (lambda < -delta)
      throw DomainError("mode_duhamel: lambda < -delta diverges on the forward branch");
    // u(tau) = int_{-inf}^{tau} e^(lambda (s - tau)) f ds; the tail beyond the
    // grid is closed assuming f ~ C e^(delta s).
    double psi1, psi2;
    panel_psi(z, dtau, psi1, psi2);
    const double fac = std::exp(-z);
    u[0] = f[0] / (lambda + delta);
    for (Eigen::Index i = 0; i + 1 < n; ++i)
      u[i + 1] = fac * u[i] + f[i] * psi1 + (f[i + 1] - f[i]) * psi2;
  }
  return u;
}

InhomSolution solve_linear_inhom(const SpectralDecomposition& dec, const MatrixXd& f, double delta,
                                 const VectorXd& tau) {
  const Eigen::Index n = dec.phi_full.rows();
  const Eigen::Index nt = tau.size();
  if (f.rows() != n || f.cols() != nt)
    throw DomainError("solve_linear_inhom: forcing shape does not match basis and grid");
  if (nt < 2) throw DomainError("solve_linear_inhom: need at least two time samples");
  if (!(delta > 0)) throw DomainError("solve_linear_inhom: delta must be positive");
  const double dtau = tau[1] - tau[0];

  // Expand the forcing in the weighted eigenbasis; rows are mode histories.
  MatrixXd coef = dec.phi_full.transpose() * (dec.op.W.asDiagonal() * f);

  // Forcing is expected bounded by C e^(delta tau); flag clear violations.
  bool warning = false;
  {
    VectorXd norms = coef.colwise().norm();
    double c_end = norms[nt - 1] * std::exp(-delta * tau[nt - 1]);
    double c_max = 0.0;
    for (Eigen::Index i = 0; i < nt; ++i)
      c_max = std::max(c_max, norms[i] * std::exp(-delta * tau[i]));
    if (c_max > 10.0 * c_end + 1e-300) warning = true;
  }

  MatrixXd ucoef(n, nt);
  for (Eigen::Index j = 0; j < n; ++j) {
    bool in_J = dec.lambda_full[j] < -delta;
    ucoef.row(j) =
        mode_duhamel(coef.row(j).transpose(), dec.lambda_full[j], in_J, delta, dtau).transpose();
  }
  InhomSolution sol;
  sol.v = dec.phi_full * ucoef;
  sol.decay_warning = warning;
  return sol;
}

LayerPartition layer_partition(const VectorXd& lambda_neg) {
  const int I = static_cast<int>(lambda_neg.size());
  if (I < 1) throw DomainError("layer_partition: need at least one negative eigenvalue");
  for (int i = 0; i < I; ++i)
    if (!(lambda_neg[i] < 0)) throw DomainError("layer_partition: eigenvalues must be negative");

  // Snap near-degenerate eigenvalues to their cluster mean so exact resonances
  // (equal ratios) classify consistently.
  VectorXd snapped(I);
  int start = 0;
  while (start < I) {
    int end = start + 1;
    while (end < I && std::abs(lambda_neg[end] - lambda_neg[end - 1]) < kEigTol) ++end;
    double mean = lambda_neg.segment(start, end - start).mean();
    for (int i = start; i < end; ++i) snapped[i] = mean;
    start = end;
  }

  const double lam_I = snapped[I - 1];  // slowest decay rate
  LayerPartition part;
  part.L = static_cast<int>(std::floor(snapped[0] / lam_I + 1e-9));
  part.J.assign(part.L, {});
  for (int m = 0; m < I; ++m) {
    int l = static_cast<int>(std::floor(snapped[m] / lam_I + 1e-9));
    l = std::clamp(l, 1, part.L);
    part.J[l - 1].push_back(m);
  }

  part.delta.resize(part.L);
  for (int l = 1; l <= part.L; ++l) {
    double upper = (l + 1) * lam_I;  // next resonance below the layer
    double inner;                    // most negative rate inside the layer
    if (part.J[l - 1].empty()) {
      inner = l * lam_I;
    } else {
      inner = snapped[part.J[l - 1].front()];
      for (int m : part.J[l - 1]) inner = std::min(inner, snapped[m]);
    }
    part.delta[l - 1] = -(upper + inner) / 2.0;
    if (!(part.delta[l - 1] > -inner && part.delta[l - 1] < -upper))
      throw SolverFailure("layer_partition: no admissible delta for layer " + std::to_string(l));
  }
  return part;
}

AncientSolution construct_ancient(const ShrinkerProfile& profile, const SpectralDecomposition& dec,
                                  const CoefficientVector& a, const AncientOptions& opts) {
  const int I = static_cast<int>(dec.morse_index);
  if (a.a.size() != I)
    throw DomainError("construct_ancient: amplitude count " + std::to_string(a.a.size()) +
                      " does not match Morse index " + std::to_string(I));
  const double anorm = a.a.norm();
  if (!(anorm < opts.epsilon0))
    throw DomainError("construct_ancient: |a| = " + std::to_string(anorm) +
                      " is not below epsilon0; apply time_shift first");
  const double alpha = profile.alpha;
  const double T_max = opts.T_max > 0 ? opts.T_max : 40.0 / (1.0 + alpha);
  if (!(opts.tau0 > -T_max))
    throw DomainError("construct_ancient: tau0 must exceed -T_max");

  AncientSolution sol;
  sol.profile = profile;
  sol.a = a;
  sol.a.lambda = dec.lambda.head(I);
  sol.T_shift = 0.0;

  // Uniform grid landing exactly on both ends, spacing as close to opts.dtau
  // as possible.
  const double span = opts.tau0 + T_max;
  const int n_steps = std::max(1, static_cast<int>(std::lround(span / opts.dtau)));
  const int nt = n_steps + 1;
  sol.tau.resize(nt);
  for (int i = 0; i < nt; ++i) sol.tau[i] = -T_max + span * i / n_steps;
  sol.tau[nt - 1] = opts.tau0;

  sol.partition = layer_partition(dec.lambda.head(I));

  const int n = static_cast<int>(profile.h.samples.size());
  MatrixXd total = MatrixXd::Zero(n, nt);

  for (int l = 1; l <= sol.partition.L; ++l) {
    AncientLayer layer;
    layer.modes = sol.partition.J[l - 1];
    layer.delta = sol.partition.delta[l - 1];
    if (layer.modes.empty()) {
      // Zero forcing difference at w = 0: the fixed point is exactly zero.
      sol.layers.push_back(std::move(layer));
      continue;
    }
    MatrixXd iota = linear_mode_ansatz(dec, a, layer.modes, sol.tau);
    MatrixXd w = MatrixXd::Zero(n, nt);
    bool converged = false;
    double damp = 1.0, prev_change = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iter; ++it) {
      // The forcing difference must be evaluated in one pass: unstable modes
      // outside J amplify early-time forcing by e^(|lambda| T), so noise from
      // differencing two separate nonlinearity evaluations (absolute size
      // eps |x(total)|, not decaying with the layer field) would swamp the
      // fixed point wherever the layer rate sits close to an eigenvalue.
      MatrixXd rhs = nonlinearity_E_diff(profile, total, MatrixXd(w + iota));
      MatrixXd mapped = solve_linear_inhom(dec, rhs, layer.delta, sol.tau).v;
      double change = (mapped - w).cwiseAbs().maxCoeff();
      layer.iterations = it;
      layer.final_change = change;
      if (change < opts.tol_fix) {
        w.swap(mapped);
        converged = true;
        break;
      }
      // A flat residual means the iteration multiplier is near -1 (the layer
      // rate sits close to a resonance); averaging the iterates converges to
      // the same fixed point.
      if (damp == 1.0 && change > 0.9 * prev_change) damp = 0.5;
      if (damp == 1.0)
        w.swap(mapped);
      else
        w = damp * mapped + (1.0 - damp) * w;
      prev_change = change;
    }
    if (!converged)
      throw ContractionDiverged("construct_ancient: layer " + std::to_string(l) +
                                " did not contract below tol_fix in " +
                                std::to_string(opts.max_iter) + " iterations (last change " +
                                std::to_string(layer.final_change) + ")");
    total += w + iota;
    layer.w = std::move(w);
    sol.layers.push_back(std::move(layer));
  }
  sol.v = std::move(total);

  // Measured residual of d/dtau v = alpha h^(1+1/alpha)(v'' + v) + v + E(v) by
  // central differences on interior nodes.
  {
    const MatrixXd& D2 = cached_diff(n, 2);
    VectorXd hw = alpha * profile.h.samples.array().pow(1.0 + 1.0 / alpha);
    MatrixXd Lv = hw.asDiagonal() * (D2 * sol.v + sol.v);
    Lv += sol.v;
    MatrixXd rhs = Lv + nonlinearity_E(profile, sol.v);
    double dtau = sol.tau[1] - sol.tau[0];
    double worst = 0.0;
    for (int i = 1; i + 1 < nt; ++i) {
      VectorXd dv = (sol.v.col(i + 1) - sol.v.col(i - 1)) / (2.0 * dtau);
      worst = std::max(worst, (dv - rhs.col(i)).cwiseAbs().maxCoeff());
    }
    sol.pde_residual = worst;
  }
  return sol;
}

std::pair<CoefficientVector, double> time_shift(const CoefficientVector& a, double epsilon0) {
  if (a.a.size() != a.lambda.size())
    throw DomainError("time_shift: amplitude and eigenvalue counts differ");
  if (!(epsilon0 > 0)) throw DomainError("time_shift: epsilon0 must be positive");
  for (Eigen::Index i = 0; i < a.lambda.size(); ++i)
    if (!(a.lambda[i] < 0)) throw DomainError("time_shift: eigenvalues must be negative");

  auto mass = [&](double T) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.a.size(); ++i)
      s += a.a[i] * a.a[i] * std::exp(2.0 * a.lambda[i] * T);
    return s;
  };
  const double target = (1.0 - 1e-9) * epsilon0;
  if (mass(0.0) <= target) return {a, 0.0};

  // When every mode decays at the slowest rate the analytic bound IS the
  // root; pad it so roundoff cannot leave mass(hi) marginally above target.
  double rate = a.lambda.cwiseAbs().minCoeff();
  double lo = 0.0, hi = std::log(mass(0.0) / target) / (2.0 * rate) + 1e-9;
  if (mass(hi) > target) throw SolverFailure("time_shift: bracket failed");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (mass(mid) <= target ? hi : lo) = mid;
  }
  CoefficientVector shifted;
  shifted.lambda = a.lambda;
  shifted.a = (a.a.array() * (a.lambda.array() * hi).exp()).matrix();
  return {shifted, hi};
}

CoefficientVector recenter(const CoefficientVector& a, const Eigen::Vector3d& B, double alpha,
                           const SpectralDecomposition& dec, const ShrinkerProfile& profile) {
  if (a.a.size() < 3) throw ModeMismatch("recenter: need at least three unstable modes");
  if (dec.phi.cols() < 3) throw ModeMismatch("recenter: decomposition has fewer than three modes");
  const int n = static_cast<int>(profile.h.samples.size());
  const SupportFunction& hs = profile.h;

  // Mode 1 must be the profile itself, modes 2 and 3 the translations cos/sin.
  VectorXd hn = hs.samples / std::sqrt(inner_h(hs.samples, hs.samples, hs));
  if (std::abs(inner_h(dec.phi.col(0), hn, hs)) < 1.0 - 1e-6)
    throw ModeMismatch("recenter: lowest mode is not aligned with the profile");
  VectorXd th = theta_grid(n);
  VectorXd c = th.array().cos(), s = th.array().sin();
  auto span_residual = [&](const VectorXd& f) {
    double p2 = inner_h(f, dec.phi.col(1), hs);
    double p3 = inner_h(f, dec.phi.col(2), hs);
    VectorXd res = f - p2 * dec.phi.col(1) - p3 * dec.phi.col(2);
    return std::sqrt(inner_h(res, res, hs) / inner_h(f, f, hs));
  };
  if (span_residual(c) > 1e-6 || span_residual(s) > 1e-6)
    throw ModeMismatch("recenter: modes 2,3 do not span the translations");

  CoefficientVector out = a;
  const double fac = std::pow(1.0 + alpha, -1.0 / (alpha + 1.0));
  out.a[0] += B[0] / (1.0 + alpha);
  out.a[1] += fac * B[1];
  out.a[2] += fac * B[2];
  return out;
}

std::vector<LayerRate> layer_rates(const AncientSolution& sol, const SpectralDecomposition& dec) {
  std::vector<LayerRate> rates;
  const Eigen::Index nt = sol.tau.size();
  VectorXd w = dec.op.W;
  for (Eigen::Index m = 0; m < sol.a.a.size(); ++m) {
    if (sol.a.a[m] == 0.0) continue;
    VectorXd signal = sol.v.transpose() * (w.asDiagonal() * dec.phi.col(m));
    std::vector<Eigen::Index> live;
    for (Eigen::Index i = 0; i < nt; ++i)
      if (std::abs(signal[i]) > 1e-13) live.push_back(i);
    // Fit over the deepest quartile of the usable range, where the layer's own
    // mode dominates the signal.
    Eigen::Index quart = static_cast<Eigen::Index>(live.size()) / 4;
    if (quart < 8)
      throw InsufficientDecay("layer_rates: fewer than 8 usable samples for mode " +
                              std::to_string(m + 1));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (Eigen::Index q = 0; q < quart; ++q) {
      double x = sol.tau[live[q]];
      double y = std::log(std::abs(signal[live[q]]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double nq = static_cast<double>(quart);
    double slope = (nq * sxy - sx * sy) / (nq * sxx - sx * sx);
    double intercept = (sy - slope * sx) / nq;
    LayerRate r;
    r.mode = static_cast<int>(m);
    r.slope = slope;
    r.amplitude = std::exp(intercept);
    r.a_recovered = signal[live[0]] > 0 ? r.amplitude : -r.amplitude;
    rates.push_back(r);
  }
  return rates;
}

}  // namespace af
