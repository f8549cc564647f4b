#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "arq/taylor.hpp"

namespace arq {

/// Certified fractions of the measure reached by each order's maximizer.
struct Guarantees {
  double order1 = 1.0;
  double order2 = 1.0 - 1e-8;
  double order3 = 0.5;

  double for_order(int j) const { return j == 1 ? order1 : j == 2 ? order2 : order3; }
  /// min over orders 1..q
  double min_up_to(int q) const;
};

struct MeasureResult {
  double phi_bar = 0.0;
  Vector displacement;
  double guarantee = 1.0;
};

/// Maximizes the order-j Taylor decrement of `bundle` over ||d|| <= delta.
///
/// j = 1 is closed form, j = 2 solves a trust-region subproblem, j = 3 runs
/// `starts` projected-gradient descents from deterministic starting points.
MeasureResult optimality_measure(const Bundle& bundle, int j, double delta,
                                 const Guarantees& guarantees = {}, int starts = 50);

struct InnerOptions {
  int max_iters = 500;
  double radius_cap = 1.0;
  double radius_floor = 1e-8;
  Guarantees guarantees;
};

struct StepResult {
  Vector step;
  std::optional<std::vector<double>> radii;
  std::vector<Vector> inner_displacements;
  bool long_step = false;
  int inner_iterations = 0;
};

/// Coefficient of eps_l delta^l / l! in the inner termination test.
double inner_test_constant(double theta, double omega, double varsigma);

/// Approximately minimizes the model starting from `warm_start`.
///
/// The returned step never decreases the model decrement below its value at
/// the warm start. It is either long (||s|| >= 1) or comes with radii and
/// displacements passing the inner termination test for orders 1..q.
/// Throws SolverStall when the iteration cap is hit without either outcome.
StepResult minimize_model(const Model& model, const Vector& warm_start, int q, double theta,
                          double omega, double varsigma, const std::vector<double>& epsilons,
                          const InnerOptions& options = {});

/// Largest delta = cap * 2^-i >= floor passing the order-l inner test at s.
/// Throws SolverStall when the floor is reached.
std::pair<double, MeasureResult> radius_search(const Model& model, const Vector& s, int l,
                                               double epsilon_l, double theta, double omega,
                                               double varsigma, double delta_cap,
                                               const InnerOptions& options = {});

}  // namespace arq
