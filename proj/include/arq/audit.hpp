#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "arq/diagnostics.hpp"

namespace arq {

struct LipschitzEstimate {
  std::vector<double> per_order;  // per_order[j] bounds the Lipschitz constant of the j-th derivative
  double L_f = 1.0;               // max over orders 0..p, at least 1
  double L_fp = 1.0;              // order p, at least 1
};

/// Upper estimates from derivative norms of one order higher at the given
/// points. Order-4 norms (needed when p = 3) use central differences of the
/// third derivative.
LipschitzEstimate estimate_lipschitz(const Problem& problem, const std::vector<Vector>& points, int p);

/// Points visited by a run: iterates, trial points and samples along each step.
std::vector<Vector> visited_points(const SolveResult& run, int samples_per_step = 9);

/// Uniform samples in the ball of `radius` around `center`, plus the center.
std::vector<Vector> ball_samples(const Vector& center, double radius, int count, std::uint64_t seed);

/// Ground-truth audit of one trace against the properties the analysis guarantees.
struct AuditReport {
  LipschitzEstimate lipschitz;
  BoundReport bounds;
  int step3_runs = 0;
  int relative_error_violations = 0;
  int sigma_violations = 0;
  int accounting_violations = 0;
  int model_decrease_violations = 0;
  int step_bound_violations = 0;
  int radii_floor_violations = 0;       // at entry to Step 2
  int global_radii_floor_violations = 0;
  int function_decrease_violations = 0;
  int value_eval_violations = 0;  // more than two value evaluations in an iteration
  int step5_budget_violations = 0;
  int eval_bound_violations = 0;
  int first_check_absolute = 0;
  int exact_degeneration_violations = 0;
  std::vector<std::string> messages;

  int total_violations() const;
};

AuditReport audit_run(const Problem& problem, const NoiseModel& noise, const SolveResult& run);

}  // namespace arq
