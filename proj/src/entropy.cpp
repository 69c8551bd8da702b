#include "ancientflow/entropy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ancientflow/errors.hpp"

namespace af {

using std::numbers::pi;

namespace {

double entropy_from_samples(double alpha, const VectorXd& uz, double A) {
  double mean;
  if (alpha == 1.0) {
    mean = quad(uz.array().log().matrix()) / (2.0 * pi);
    return mean - 0.5 * std::log(A / pi);
  }
  double p = 1.0 - 1.0 / alpha;
  mean = quad(uz.array().pow(p).matrix()) / (2.0 * pi);
  return alpha / (alpha - 1.0) * std::log(mean) - 0.5 * std::log(A / pi);
}

struct Objective {
  const SupportFunction& u;
  double A;
  double operator()(const Vector2d& z) const {
    VectorXd uz = translate_samples(u, z);
    if (uz.minCoeff() <= 0.0) return -1e300;
    return entropy_from_samples(u.alpha, uz, A);
  }
};

// Nelder-Mead ascent in 2D. Returns best point found; iters accumulates.
Vector2d nelder_mead(const Objective& f, Vector2d seed, double scale, int& iters) {
  std::array<Vector2d, 3> x{seed, seed + Vector2d(scale, 0.0), seed + Vector2d(0.0, scale)};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
  auto order = [&] {
    // descending by value: x[0] best
    for (int i = 0; i < 2; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (fx[j] > fx[i]) {
          std::swap(fx[i], fx[j]);
          std::swap(x[i], x[j]);
        }
  };
  order();
  for (int it = 0; it < 600; ++it) {
    ++iters;
    double step = std::max((x[1] - x[0]).norm(), (x[2] - x[0]).norm());
    if (step < 1e-12) break;
    Vector2d c = 0.5 * (x[0] + x[1]);  // centroid of the two best
    Vector2d xr = c + (c - x[2]);
    double fr = f(xr);
    if (fr > fx[0]) {
      Vector2d xe = c + 2.0 * (c - x[2]);
      double fe = f(xe);
      if (fe > fr) {
        x[2] = xe;
        fx[2] = fe;
      } else {
        x[2] = xr;
        fx[2] = fr;
      }
    } else if (fr > fx[1]) {
      x[2] = xr;
      fx[2] = fr;
    } else {
      Vector2d xc = c + 0.5 * ((fr > fx[2] ? xr : x[2]) - c);
      double fc = f(xc);
      if (fc > std::max(fr, fx[2])) {
        x[2] = xc;
        fx[2] = fc;
      } else {
        for (int i = 1; i < 3; ++i) {
          x[i] = x[0] + 0.5 * (x[i] - x[0]);
          fx[i] = f(x[i]);
        }
      }
    }
    order();
  }
  return x[0];
}

}  // namespace

double entropy_at(const SupportFunction& u, const Vector2d& z0) {
  VectorXd uz = translate_samples(u, z0);
  if (uz.minCoeff() <= 0.0)
    throw CenterOutside("entropy_at: base point is not strictly inside the curve");
  return entropy_from_samples(u.alpha, uz, area(u));
}

EntropyReport entropy(const SupportFunction& u) {
  Objective f{u, area(u)};
  EntropyReport rep;
  rep.inner_value_at_centroid = entropy_at(u, centroid(u));

  // Coarse scan over the bounding box of the boundary; keeps the search
  // global since the objective need not be concave.
  Eigen::MatrixXd X = boundary_points(u);
  double x0 = X.col(0).minCoeff(), x1 = X.col(0).maxCoeff();
  double y0 = X.col(1).minCoeff(), y1 = X.col(1).maxCoeff();
  Vector2d grid_best = centroid(u);
  double grid_val = f(grid_best);
  const int G = 64;
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j) {
      Vector2d z(x0 + (x1 - x0) * (i + 0.5) / G, y0 + (y1 - y0) * (j + 0.5) / G);
      double v = f(z);
      if (v > grid_val) {
        grid_val = v;
        grid_best = z;
      }
    }

  double scale = 0.02 * std::sqrt(f.A / pi);
  std::array<Vector2d, 3> seeds{steiner_point(u), centroid(u), grid_best};
  Vector2d best = grid_best;
  double best_val = grid_val;
  for (const Vector2d& s : seeds) {
    if (f(s) <= -1e299) continue;
    Vector2d z = nelder_mead(f, s, scale, rep.iterations);
    double v = f(z);
    if (v > best_val) {
      best_val = v;
      best = z;
    }
  }
  if (best_val <= -1e299) throw OptimizerFailed("entropy: no admissible base point found");
  rep.value = best_val;
  rep.center = best;
  return rep;
}

}  // namespace af
