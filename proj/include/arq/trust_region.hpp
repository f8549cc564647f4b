#pragma once

#include "arq/tensor.hpp"

namespace arq {

struct TrustRegionSolution {
  Vector step;
  double value = 0.0;       // g.d + 0.5 d^T H d at `step`
  double multiplier = 0.0;  // mu >= 0 with (H + mu I) d = -g
  bool hard_case = false;
};

/// Global minimizer of g.d + 0.5 d^T H d subject to ||d|| <= radius.
///
/// Uses a full eigendecomposition of H and a safeguarded Newton iteration on
/// the secular equation 1/||d(mu)|| = 1/radius. The hard case (g orthogonal
/// to the leftmost eigenspace) is handled explicitly. When several global
/// solutions exist the lexicographically largest one is returned.
TrustRegionSolution solve_trust_region(const Vector& g, const Matrix& h, double radius);

/// True if a is lexicographically larger than b, comparing entries that
/// differ by more than tol.
bool lexicographically_greater(const Vector& a, const Vector& b, double tol = 1e-12);

}  // namespace arq
