#include "ancientflow/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "ancientflow/errors.hpp"

namespace af {

using std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

VectorXd theta_grid(int N) {
  if (N < 1) throw DomainError("theta_grid: N must be positive");
  VectorXd th(N);
  for (int i = 0; i < N; ++i) th[i] = 2.0 * pi * i / N;
  return th;
}

MatrixXd fourier_diff1(int N) {
  if (N < 2 || N % 2 != 0) throw DomainError("fourier_diff1: N must be even and >= 2");
  MatrixXd D = MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      double s = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = 0.5 * s / std::tan(pi * (i - j) / N);
    }
  return D;
}

MatrixXd fourier_diff2(int N) {
  if (N < 2 || N % 2 != 0) throw DomainError("fourier_diff2: N must be even and >= 2");
  MatrixXd D = MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      double s = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      double h = std::sin(pi * (i - j) / N);
      D(i, j) = -s / (2.0 * h * h);
    }
  // Diagonal chosen so constants differentiate to exactly zero; this matches
  // the analytic value -N^2/12 - 1/6 up to roundoff and keeps D symmetric.
  for (int i = 0; i < N; ++i) D(i, i) = -D.row(i).sum();
  return D;
}

const MatrixXd& cached_diff(int N, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, MatrixXd> cache;
  std::scoped_lock lock(mu);
  auto key = std::make_pair(N, order);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, order == 1 ? fourier_diff1(N) : fourier_diff2(N)).first;
  return it->second;
}

double quad(const VectorXd& f) { return 2.0 * pi / f.size() * f.sum(); }

double fourier_cos(const VectorXd& f, int m) {
  const int N = static_cast<int>(f.size());
  double acc = 0.0;
  for (int i = 0; i < N; ++i) acc += f[i] * std::cos(2.0 * pi * m * i / N);
  return 2.0 / N * acc;
}

double fourier_sin(const VectorXd& f, int m) {
  const int N = static_cast<int>(f.size());
  double acc = 0.0;
  for (int i = 0; i < N; ++i) acc += f[i] * std::sin(2.0 * pi * m * i / N);
  return 2.0 / N * acc;
}

VectorXd trig_interp(const VectorXd& f, const VectorXd& at) {
  const int N = static_cast<int>(f.size());
  if (N % 2 != 0) throw DomainError("trig_interp: sample count must be even");
  // Real DFT coefficients once, then direct evaluation. The Nyquist mode is
  // evaluated as cos only, the standard interpolant of real even-N data.
  const int M = N / 2;
  VectorXd a(M + 1), b(M + 1);
  for (int m = 0; m <= M; ++m) {
    double ca = 0.0, cb = 0.0;
    for (int i = 0; i < N; ++i) {
      double ang = 2.0 * pi * m * i / N;
      ca += f[i] * std::cos(ang);
      cb += f[i] * std::sin(ang);
    }
    a[m] = 2.0 / N * ca;
    b[m] = 2.0 / N * cb;
  }
  VectorXd out(at.size());
  for (int k = 0; k < at.size(); ++k) {
    double v = 0.5 * a[0];
    for (int m = 1; m < M; ++m) v += a[m] * std::cos(m * at[k]) + b[m] * std::sin(m * at[k]);
    v += 0.5 * a[M] * std::cos(M * at[k]);
    out[k] = v;
  }
  return out;
}

VectorXd trig_resample(const VectorXd& f, int M) {
  if (static_cast<int>(f.size()) == M) return f;
  return trig_interp(f, theta_grid(M));
}

}  // namespace af
