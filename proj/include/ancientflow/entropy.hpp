#pragma once
#include "ancientflow/support.hpp"

namespace af {

struct EntropyReport {
  double value = 0.0;                    // sup over admissible base points
  Vector2d center{0.0, 0.0};             // maximizing base point
  double inner_value_at_centroid = 0.0;  // objective at the area centroid
  int iterations = 0;                    // total simplex iterations used
};

// Scale-invariant entropy of the curve relative to base point z0. Throws
// CenterOutside unless z0 lies strictly inside the enclosed region.
double entropy_at(const SupportFunction& u, const Vector2d& z0);

// Entropy maximized over interior base points: coarse grid scan plus
// Nelder-Mead polish from several seeds.
EntropyReport entropy(const SupportFunction& u);

}  // namespace af
