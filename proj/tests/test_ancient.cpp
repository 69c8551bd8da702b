#include <doctest.h>

#include <ancientflow/ancient.hpp>
#include <ancientflow/errors.hpp>
#include <ancientflow/flow.hpp>
#include <ancientflow/grid.hpp>
#include <ancientflow/shrinker.hpp>
#include <ancientflow/spectrum.hpp>

#include <cmath>
#include <utility>
#include <vector>

using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

struct CircleLab {
  af::ShrinkerProfile profile;
  af::SpectralDecomposition dec;
};

const CircleLab& lab16() {
  static CircleLab lab = [] {
    af::ShrinkerProfile p = af::circle_shrinker(1.0 / 16.0, 64);
    af::SpectralDecomposition d = af::eigs(af::build_operator(p, 64), 12);
    return CircleLab{p, d};
  }();
  return lab;
}

VectorXd tau_grid(double lo, double hi, double dtau) {
  int n = static_cast<int>(std::lround((hi - lo) / dtau)) + 1;
  VectorXd t(n);
  for (int i = 0; i < n; ++i) t[i] = lo + (hi - lo) * i / (n - 1);
  return t;
}

// exact solution of u' = -lambda u + (a + b tau)
double linear_particular(double lam, double a, double b, double t) {
  return (a + b * t) / lam - b / (lam * lam);
}

}  // namespace

TEST_SUITE("ancient") {

TEST_CASE("quadratic error term vanishes at zero and follows its leading model") {
  const auto& [p, dec] = lab16();
  const int n = p.h.N();
  CHECK(af::nonlinearity_E(p, VectorXd(VectorXd::Zero(n))).cwiseAbs().maxCoeff() == 0.0);

  VectorXd g = af::theta_grid(n);
  for (double eps : {1e-3, -1e-3}) {
    VectorXd v(n), x(n);
    for (int i = 0; i < n; ++i) {
      v[i] = eps * std::cos(2.0 * g[i]);
      x[i] = -3.0 * v[i];  // h = 1: x = v'' + v
    }
    VectorXd E = af::nonlinearity_E(p, v);
    double alpha = p.alpha;
    VectorXd model = (-0.5 * alpha * (alpha + 1.0)) * x.array().square();
    CHECK((E - model).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(E.cwiseAbs().maxCoeff() > 1e-10);  // genuinely quadratic, not zero
  }

  // expansion domain: |h^(1/alpha)(v''+v)| must stay below 1/2
  CHECK_THROWS_AS(af::nonlinearity_E(p, VectorXd(VectorXd::Constant(n, 0.6))), af::OutOfRange);

  // matrix overload agrees with the vector one column by column
  MatrixXd V(n, 3);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < n; ++i) V(i, c) = 1e-3 * std::cos((c + 1.0) * g[i]);
  MatrixXd EM = af::nonlinearity_E(p, V);
  for (int c = 0; c < 3; ++c)
    CHECK((EM.col(c) - af::nonlinearity_E(p, VectorXd(V.col(c)))).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("error-term differences stay accurate down to vanishing increments") {
  const auto& [p, dec] = lab16();
  const int n = p.h.N();
  VectorXd g = af::theta_grid(n);
  MatrixXd v(n, 2), dv(n, 2);
  for (int i = 0; i < n; ++i) {
    v(i, 0) = 2e-2 * std::cos(4.0 * g[i]);
    v(i, 1) = -1e-2 * std::sin(3.0 * g[i]);
    dv(i, 0) = 3e-3 * std::cos(2.0 * g[i]);
    dv(i, 1) = 2e-3 * (1.0 + std::sin(g[i]));
  }

  // at moderate increments the one-pass difference matches the subtraction
  MatrixXd diff = af::nonlinearity_E_diff(p, v, dv);
  MatrixXd direct = af::nonlinearity_E(p, MatrixXd(v + dv)) - af::nonlinearity_E(p, v);
  CHECK((diff - direct).cwiseAbs().maxCoeff() < 1e-14);

  // zero base reduces to the plain error term, bit for bit
  MatrixXd zero = MatrixXd::Zero(n, 2);
  CHECK((af::nonlinearity_E_diff(p, zero, dv) - af::nonlinearity_E(p, dv)).cwiseAbs().maxCoeff() ==
        0.0);

  // the directional slope E(v + s dv) - E(v) ~ s A survives scales where the
  // subtraction is pure cancellation noise (|E| eps ~ 1e-21 vs s A ~ 1e-16)
  MatrixXd slope0 = af::nonlinearity_E_diff(p, v, MatrixXd(1e-6 * dv)) / 1e-6;
  for (double s : {1e-9, 1e-12}) {
    MatrixXd slope = af::nonlinearity_E_diff(p, v, MatrixXd(s * dv)) / s;
    CHECK((slope - slope0).cwiseAbs().maxCoeff() < 1e-5 * slope0.cwiseAbs().maxCoeff());
  }

  CHECK_THROWS_AS(af::nonlinearity_E_diff(p, v, MatrixXd(n, 3)), af::DomainError);
  CHECK_THROWS_AS(af::nonlinearity_E_diff(p, MatrixXd(MatrixXd::Constant(n, 1, 0.4)),
                                          MatrixXd(MatrixXd::Constant(n, 1, 0.2))),
                  af::OutOfRange);
}

TEST_CASE("mode integrals are exact on piecewise-linear forcing") {
  const double dtau = 1.0 / 128.0;
  VectorXd tau = tau_grid(-4.0, -1.0, dtau);
  const int nt = static_cast<int>(tau.size());
  const double a = 1.0, b = 0.3;
  VectorXd f(nt);
  for (int i = 0; i < nt; ++i) f[i] = a + b * tau[i];

  SUBCASE("forward branch with decaying homogeneous part") {
    double lam = 2.0, delta = 0.5;
    VectorXd u = af::mode_duhamel(f, lam, false, delta, dtau);
    double u0 = f[0] / (lam + delta);
    for (int i = 0; i < nt; ++i) {
      double up = linear_particular(lam, a, b, tau[i]);
      double up0 = linear_particular(lam, a, b, tau[0]);
      double want = up + (u0 - up0) * std::exp(-lam * (tau[i] - tau[0]));
      CHECK(u[i] == doctest::Approx(want).epsilon(1e-12));
    }
  }

  SUBCASE("forward branch with slowly growing homogeneous part") {
    double lam = -0.3, delta = 0.5;
    VectorXd u = af::mode_duhamel(f, lam, false, delta, dtau);
    double u0 = f[0] / (lam + delta);
    for (int i = 0; i < nt; ++i) {
      double up = linear_particular(lam, a, b, tau[i]);
      double up0 = linear_particular(lam, a, b, tau[0]);
      double want = up + (u0 - up0) * std::exp(-lam * (tau[i] - tau[0]));
      CHECK(u[i] == doctest::Approx(want).epsilon(1e-11));
    }
  }

  SUBCASE("anchored branch vanishes at the final node") {
    double lam = -2.0, delta = 1.0;
    VectorXd u = af::mode_duhamel(f, lam, true, delta, dtau);
    CHECK(u[nt - 1] == 0.0);
    for (int i = 0; i < nt; ++i) {
      double up = linear_particular(lam, a, b, tau[i]);
      double upe = linear_particular(lam, a, b, tau[nt - 1]);
      double want = up - upe * std::exp(-lam * (tau[i] - tau[nt - 1]));
      CHECK(u[i] == doctest::Approx(want).epsilon(1e-12));
    }
  }

  SUBCASE("resonant and divergent parameters are rejected") {
    CHECK_THROWS_AS(af::mode_duhamel(f, -0.5 + 1e-10, false, 0.5, dtau), af::ResonanceError);
    CHECK_THROWS_AS(af::mode_duhamel(f, -2.0, false, 1.0, dtau), af::DomainError);
    CHECK_THROWS_AS(af::mode_duhamel(f, 1.0, false, 0.5, -dtau), af::DomainError);
  }
}

TEST_CASE("inhomogeneous solve reproduces a manufactured single-mode solution") {
  af::ShrinkerProfile p = af::circle_shrinker(0.5, 64);
  af::SpectralDecomposition dec = af::eigs(af::build_operator(p, 64), 8);
  const double dtau = 1.0 / 128.0;
  VectorXd tau = tau_grid(-4.0, -1.0, dtau);
  const int nt = static_cast<int>(tau.size());

  // target: v = e^(delta tau) phi_j for a mode outside J, so the mode equation
  // c' = -lambda c + f_j demands f_j = (delta + lambda) e^(delta tau)
  const int j = 3;
  const double lam = dec.lambda_full[j];
  CHECK(lam == doctest::Approx(0.5).epsilon(1e-9));
  const double delta = 0.8;
  MatrixXd f(64, nt);
  for (int i = 0; i < nt; ++i) f.col(i) = (delta + lam) * std::exp(delta * tau[i]) * dec.phi_full.col(j);

  af::InhomSolution sol = af::solve_linear_inhom(dec, f, delta, tau);
  CHECK_FALSE(sol.decay_warning);
  for (int i = 0; i < nt; i += 48) {
    VectorXd want = std::exp(delta * tau[i]) * dec.phi_full.col(j);
    CHECK((sol.v.col(i) - want).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("inhomogeneous solve is linear and flags non-decaying forcing") {
  af::ShrinkerProfile p = af::circle_shrinker(0.5, 64);
  af::SpectralDecomposition dec = af::eigs(af::build_operator(p, 64), 8);
  const double dtau = 1.0 / 64.0;
  VectorXd tau = tau_grid(-3.0, -1.0, dtau);
  const int nt = static_cast<int>(tau.size());
  VectorXd g = af::theta_grid(64);

  MatrixXd f1(64, nt), f2(64, nt);
  for (int i = 0; i < nt; ++i)
    for (int q = 0; q < 64; ++q) {
      f1(q, i) = std::exp(0.7 * tau[i]) * std::cos(2.0 * g[q]);
      f2(q, i) = std::exp(0.9 * tau[i]) * (0.3 + std::sin(3.0 * g[q]));
    }
  const double delta = 0.65;
  MatrixXd va = af::solve_linear_inhom(dec, f1, delta, tau).v;
  MatrixXd vb = af::solve_linear_inhom(dec, f2, delta, tau).v;
  MatrixXd vab = af::solve_linear_inhom(dec, (f1 + f2).eval(), delta, tau).v;
  double scale = vab.cwiseAbs().maxCoeff();
  CHECK((vab - va - vb).cwiseAbs().maxCoeff() < 1e-12 * scale);

  // constant-in-time forcing violates the e^(delta tau) envelope; over a span
  // of 4 the deviation factor e^(4 delta) = 13.5 clears the warning threshold
  VectorXd tau_long = tau_grid(-5.0, -1.0, dtau);
  MatrixXd ones = MatrixXd::Ones(64, tau_long.size());
  CHECK(af::solve_linear_inhom(dec, ones, delta, tau_long).decay_warning);

  // delta hitting an eigenvalue is resonant: circle has lambda = -1
  CHECK_THROWS_AS(af::solve_linear_inhom(dec, f1, 1.0, tau), af::ResonanceError);
}

TEST_CASE("decay layers partition the unstable spectrum") {
  const auto& [p, dec] = lab16();
  const int morse = dec.morse_index;
  REQUIRE(morse == 9);
  af::LayerPartition part = af::layer_partition(dec.lambda.head(morse));

  CHECK(part.L == 17);
  REQUIRE(static_cast<int>(part.J.size()) == 17);

  // occupied layers: ratios lambda_m / lambda_I are 17,16,16,13,13,8,8,1,1
  CHECK(part.J[0] == std::vector<int>{7, 8});
  CHECK(part.J[7] == std::vector<int>{5, 6});
  CHECK(part.J[12] == std::vector<int>{3, 4});
  CHECK(part.J[15] == std::vector<int>{1, 2});
  CHECK(part.J[16] == std::vector<int>{0});
  int total = 0;
  for (const auto& J : part.J) total += static_cast<int>(J.size());
  CHECK(total == morse);

  // rates sit strictly inside each layer's resonance-free window
  const double lamI = 1.0 / 16.0;
  for (int l = 1; l <= part.L; ++l) {
    CHECK(part.delta[l - 1] > l * lamI);
    CHECK(part.delta[l - 1] < (l + 1) * lamI);
  }
  CHECK(part.delta[0] == doctest::Approx(3.0 / 32.0).epsilon(1e-12));
  CHECK(part.delta[1] == doctest::Approx(5.0 / 32.0).epsilon(1e-12));  // empty layer midpoint
  CHECK(part.delta[7] == doctest::Approx(17.0 / 32.0).epsilon(1e-12));
  CHECK(part.delta[16] == doctest::Approx(35.0 / 32.0).epsilon(1e-12));

  CHECK_THROWS_AS(af::layer_partition(VectorXd()), af::DomainError);
  VectorXd wrong(2);
  wrong << -1.0, 0.5;
  CHECK_THROWS_AS(af::layer_partition(wrong), af::DomainError);
}

TEST_CASE("zero amplitudes produce the identically vanishing solution") {
  const auto& [p, dec] = lab16();
  af::CoefficientVector a;
  a.a = VectorXd::Zero(9);
  a.lambda = dec.lambda.head(9);
  af::AncientOptions opts;
  opts.T_max = 4.0;
  af::AncientSolution sol = af::construct_ancient(p, dec, a, opts);
  CHECK(sol.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.pde_residual < 1e-14);
  for (const auto& layer : sol.layers) CHECK(layer.final_change == 0.0);
}

TEST_CASE("single-mode construction stays close to its linear ansatz") {
  const auto& [p, dec] = lab16();
  af::CoefficientVector a;
  a.a = VectorXd::Zero(9);
  a.a[7] = 8e-4;
  a.lambda = dec.lambda.head(9);
  af::AncientOptions opts;
  opts.T_max = 5.0;
  af::AncientSolution sol = af::construct_ancient(p, dec, a, opts);

  REQUIRE(static_cast<int>(sol.layers.size()) == sol.partition.L);
  CHECK(sol.tau[0] == -5.0);
  CHECK(sol.tau[sol.tau.size() - 1] == -1.0);

  MatrixXd iota = af::linear_mode_ansatz(dec, a, {7}, sol.tau);
  double corr = (sol.v - iota).cwiseAbs().maxCoeff();
  CHECK(corr < 1e-4);   // quadratic correction is small
  CHECK(corr > 1e-12);  // but genuinely present
  CHECK(sol.pde_residual < 1e-7);

  // empty layers are skipped exactly; the active layer iterated to tolerance
  for (int l = 1; l <= sol.partition.L; ++l) {
    const af::AncientLayer& layer = sol.layers[l - 1];
    if (layer.modes.empty()) {
      CHECK(layer.w.size() == 0);
      CHECK(layer.iterations == 0);
    }
  }
  CHECK(sol.layers[0].iterations >= 2);
  CHECK(sol.layers[0].final_change < 1e-10);
  CHECK(sol.layers[0].w.size() > 0);

  // fitted decay of the active mode recovers rate and amplitude
  std::vector<af::LayerRate> rates = af::layer_rates(sol, dec);
  REQUIRE(rates.size() == 1);
  CHECK(rates[0].mode == 7);
  CHECK(rates[0].slope == doctest::Approx(1.0 / 16.0).epsilon(0.01));
  CHECK(rates[0].a_recovered == doctest::Approx(8e-4).epsilon(0.02));
}

TEST_CASE("adding a deeper mode leaves shallower layers untouched") {
  const auto& [p, dec] = lab16();
  af::CoefficientVector a1, a2;
  a1.a = VectorXd::Zero(9);
  a1.a[7] = 8e-4;
  a1.lambda = dec.lambda.head(9);
  a2 = a1;
  a2.a[0] = 6e-4;  // deepest layer (ratio 17)
  af::AncientOptions opts;
  opts.T_max = 4.0;
  af::AncientSolution s1 = af::construct_ancient(p, dec, a1, opts);
  af::AncientSolution s2 = af::construct_ancient(p, dec, a2, opts);

  // layers 1..16 see identical inputs, so the corrections agree exactly
  for (int l = 0; l < 16; ++l) {
    REQUIRE(s1.layers[l].w.size() == s2.layers[l].w.size());
    if (s1.layers[l].w.size() > 0)
      CHECK((s1.layers[l].w - s2.layers[l].w).cwiseAbs().maxCoeff() == 0.0);
  }
  // the deepest layer now carries the new mode
  CHECK(s2.layers[16].w.size() > 0);
  CHECK((s1.v - s2.v).cwiseAbs().maxCoeff() > 1e-5);
}

TEST_CASE("constructed solution is verified by forward integration") {
  const auto& [p, dec] = lab16();
  af::CoefficientVector a;
  a.a = VectorXd::Zero(9);
  a.a[7] = 8e-4;
  a.lambda = dec.lambda.head(9);
  af::AncientOptions opts;
  opts.T_max = 3.0;
  af::AncientSolution sol = af::construct_ancient(p, dec, a, opts);

  af::SupportFunction u0 = af::make_support(p.alpha, p.h.samples + sol.v.col(0));
  af::FlowOptions fopts;
  fopts.t_start = sol.tau[0];
  fopts.tol = 1e-10;
  fopts.snapshot_interval = 0.0;
  af::FlowTrajectory traj = af::evolve(u0, af::Gauge::Normalized, -1.0, fopts);
  VectorXd want = p.h.samples + sol.v.col(sol.v.cols() - 1);
  CHECK((traj.snapshots.back().samples - want).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("amplitude norm precondition is enforced") {
  const auto& [p, dec] = lab16();
  af::CoefficientVector a;
  a.a = VectorXd::Zero(9);
  a.a[0] = 0.5;  // far above epsilon0
  a.lambda = dec.lambda.head(9);
  CHECK_THROWS_AS(af::construct_ancient(p, dec, a), af::DomainError);
  af::CoefficientVector b;
  b.a = VectorXd::Zero(4);  // wrong count
  b.lambda = dec.lambda.head(4);
  CHECK_THROWS_AS(af::construct_ancient(p, dec, b), af::DomainError);
}

TEST_CASE("time shift damps amplitudes to the entry ball") {
  double alpha = 1.0 / 16.0;
  af::CoefficientVector a;
  a.a = VectorXd::Zero(1);
  a.a[0] = 1.0;
  a.lambda = VectorXd::Constant(1, -(1.0 + alpha));
  auto [shifted, T] = af::time_shift(a, 1e-2);
  // mass e^(2 lambda T) = epsilon0 gives T = log(1/epsilon0) / (2(1+alpha))
  CHECK(T == doctest::Approx(8.0 / 17.0 * std::log(100.0)).epsilon(1e-6));
  CHECK(shifted.a[0] == doctest::Approx(std::exp(a.lambda[0] * T)).epsilon(1e-12));

  double mass = shifted.a.squaredNorm();
  CHECK(mass <= 1e-2);

  // already small: identity, exact copies
  auto [same, T0] = af::time_shift(shifted, 1e-2);
  CHECK(T0 == 0.0);
  CHECK(same.a[0] == shifted.a[0]);

  // multi-mode: the guarantee holds and signs survive
  af::CoefficientVector m;
  m.a.resize(3);
  m.a << 0.3, -0.4, 0.2;
  m.lambda.resize(3);
  m.lambda << -1.0625, -1.0, -0.0625;
  auto [ms, mt] = af::time_shift(m, 1e-2);
  CHECK(mt > 0.0);
  double mmass = 0.0;
  for (int i = 0; i < 3; ++i) mmass += ms.a[i] * ms.a[i];
  CHECK(mmass <= 1e-2);
  CHECK(ms.a[0] > 0.0);
  CHECK(ms.a[1] < 0.0);

  af::CoefficientVector bad;
  bad.a = VectorXd::Ones(1);
  bad.lambda = VectorXd::Constant(1, 0.5);
  CHECK_THROWS_AS(af::time_shift(bad, 1e-2), af::DomainError);
}

TEST_CASE("recentering shifts exactly the three symmetry amplitudes") {
  const auto& [p, dec] = lab16();
  af::CoefficientVector a;
  a.a = VectorXd::Zero(9);
  a.lambda = dec.lambda.head(9);
  Vector3d B(0.32, -0.11, 0.07);
  af::CoefficientVector out = af::recenter(a, B, p.alpha, dec, p);
  double a1 = 1.0 + p.alpha;
  double fac = std::pow(a1, -1.0 / a1);
  CHECK(out.a[0] == doctest::Approx(B[0] / a1).epsilon(1e-14));
  CHECK(out.a[1] == doctest::Approx(fac * B[1]).epsilon(1e-14));
  CHECK(out.a[2] == doctest::Approx(fac * B[2]).epsilon(1e-14));
  for (int i = 3; i < 9; ++i) CHECK(out.a[i] == 0.0);

  // composition in B is additive
  Vector3d B2(-0.05, 0.21, 0.13);
  af::CoefficientVector two = af::recenter(out, B2, p.alpha, dec, p);
  af::CoefficientVector sum = af::recenter(a, (B + B2).eval(), p.alpha, dec, p);
  CHECK((two.a - sum.a).cwiseAbs().maxCoeff() < 1e-15);

  // a decomposition whose leading modes are scrambled is rejected
  af::SpectralDecomposition scrambled = dec;
  scrambled.phi.col(1).swap(scrambled.phi.col(3));
  CHECK_THROWS_AS(af::recenter(a, B, p.alpha, scrambled, p), af::ModeMismatch);
}

TEST_CASE("recentering works on the dihedral profile too") {
  af::ShrinkerProfile p = af::solve_shrinker(1.0 / 16.0, 3, 256);
  af::SpectralDecomposition dec = af::eigs(af::build_operator(p, 256), 10);
  af::CoefficientVector a;
  a.a = VectorXd::Zero(5);
  a.lambda = dec.lambda.head(5);
  Vector3d B(0.1, 0.2, -0.3);
  af::CoefficientVector out = af::recenter(a, B, p.alpha, dec, p);
  double fac = std::pow(1.0 + p.alpha, -1.0 / (1.0 + p.alpha));
  CHECK(out.a[1] == doctest::Approx(fac * 0.2).epsilon(1e-12));
  CHECK(out.a[2] == doctest::Approx(fac * -0.3).epsilon(1e-12));
}

TEST_CASE("too short a window leaves no usable decay samples") {
  const auto& [p, dec] = lab16();
  af::CoefficientVector a;
  a.a = VectorXd::Zero(9);
  a.a[7] = 8e-4;
  a.lambda = dec.lambda.head(9);
  af::AncientOptions opts;
  opts.T_max = 1.2;  // only 0.2 wide: 26 nodes, quartile below 8
  af::AncientSolution sol = af::construct_ancient(p, dec, a, opts);
  CHECK_THROWS_AS(af::layer_rates(sol, dec), af::InsufficientDecay);
}

}  // TEST_SUITE
