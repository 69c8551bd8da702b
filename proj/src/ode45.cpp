#include "ancientflow/ode45.hpp"

#include <algorithm>
#include <cmath>

#include "ancientflow/errors.hpp"

namespace af {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output weights (Hairer's contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

VectorXd dense_eval(const VectorXd& y0, const VectorXd& y1, const std::array<VectorXd, 7>& k,
                    double h, double s) {
  VectorXd ydiff = y1 - y0;
  VectorXd bspl = h * k[0] - ydiff;
  VectorXd r4 = ydiff - h * k[6] - bspl;
  VectorXd r5 = h * (d1 * k[0] + d3 * k[2] + d4 * k[3] + d5 * k[4] + d6 * k[5] + d7 * k[6]);
  double s1 = 1.0 - s;
  return y0 + s * (ydiff + s1 * (bspl + s * (r4 + s1 * r5)));
}

}  // namespace

VectorXd OdeSolution::eval(double tq) const {
  if (t.size() < 2) throw SolverFailure("OdeSolution::eval: empty trajectory");
  double lo = t.front(), hi = t.back();
  if (tq < lo - 1e-12 * (1.0 + std::abs(lo)) || tq > hi + 1e-12 * (1.0 + std::abs(hi)))
    throw DomainError("OdeSolution::eval: query outside integration span");
  tq = std::clamp(tq, lo, hi);
  auto it = std::upper_bound(t.begin(), t.end(), tq);
  size_t i = std::min<size_t>(std::max<ptrdiff_t>(it - t.begin() - 1, 0), t.size() - 2);
  double s = (tq - t[i]) / hstep[i];
  return dense_eval(y[i], y[i + 1], stage[i], hstep[i], s);
}

double OdeSolution::eval_component(double tq, int comp) const { return eval(tq)[comp]; }

OdeSolution ode45(const OdeRhs& f, double t0, double t1, const VectorXd& y0,
                  const OdeOptions& opts, const OdeEvent* event) {
  if (!(t1 > t0)) throw DomainError("ode45: need t1 > t0");
  OdeSolution sol;
  sol.t.push_back(t0);
  sol.y.push_back(y0);

  double span = t1 - t0;
  double h = opts.h_init > 0 ? opts.h_init : 1e-3 * span;
  if (opts.h_max > 0) h = std::min(h, opts.h_max);
  double t = t0;
  VectorXd y = y0;
  VectorXd k1 = f(t, y);

  for (long step = 0; step < opts.max_steps; ++step) {
    if (t >= t1) break;
    h = std::min(h, t1 - t);
    if (t + h == t) throw IntegrationFailed("ode45: step size underflow");

    VectorXd k2 = f(t + c2 * h, y + h * (a21 * k1));
    VectorXd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    VectorXd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    VectorXd k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    VectorXd k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    VectorXd ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    VectorXd k7 = f(t + h, ynew);  // FSAL

    VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double errnorm = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      errnorm += (err[i] / sc) * (err[i] / sc);
    }
    errnorm = std::sqrt(errnorm / y.size());

    if (errnorm <= 1.0) {
      sol.t.push_back(t + h);
      sol.y.push_back(ynew);
      sol.stage.push_back({k1, k2, k3, k4, k5, k6, k7});
      sol.hstep.push_back(h);

      if (event) {
        double g0 = event->g(t, y);
        double g1 = event->g(t + h, ynew);
        bool hit = false;
        if (event->direction >= 0 && g0 < 0.0 && g1 >= 0.0) hit = true;
        if (event->direction <= 0 && g0 > 0.0 && g1 <= 0.0) hit = true;
        if (hit) {
          double lo = t, hi = t + h;
          size_t idx = sol.stage.size() - 1;
          auto gval = [&](double tq) {
            double s = (tq - t) / h;
            return event->g(tq, dense_eval(y, ynew, sol.stage[idx], h, s));
          };
          for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
            double mid = 0.5 * (lo + hi);
            double gm = gval(mid);
            bool left = event->direction >= 0 ? (gm < 0.0) : (gm > 0.0);
            (left ? lo : hi) = mid;
          }
          sol.event_hit = true;
          sol.t_event = 0.5 * (lo + hi);
          sol.y_event = dense_eval(y, ynew, sol.stage[idx], h, (sol.t_event - t) / h);
          return sol;
        }
      }

      t += h;
      y = ynew;
      k1 = k7;
      double fac = errnorm > 0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
      if (opts.h_max > 0) h = std::min(h, opts.h_max);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(errnorm, -0.2));
    }
  }
  if (t < t1) throw IntegrationFailed("ode45: max step count exceeded");
  return sol;
}

}  // namespace af
