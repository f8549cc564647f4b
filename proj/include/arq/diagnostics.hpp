#pragma once

#include <string>
#include <vector>

#include "arq/solver.hpp"

namespace arq {

/// Theoretical constants and complexity bounds for one configuration.
struct BoundReport {
  int p = 2;
  int q = 1;
  double varsigma = 1.0;
  double L_f = 1.0;
  double L_fp = 1.0;  // Lipschitz constant of the p-th derivative
  double acc_max = 0.0;
  double L_bar_f = 1.0;
  double sigma_max = 0.0;
  double kappa_s = 0.0;
  double kappa_delta_min = 0.0;
  double kappa_dm = 0.0;
  std::vector<double> pi;
  std::vector<double> step_lower_bounds;
  double kappa_step2 = 0.0;  // at sigma_max
  double kappa_acc = 0.0;
  int k_acc_min = 0;
  double kappa_S = 0.0;
  double kappa_A = 0.0;
  double kappa_C = 0.0;
  double kappa_E = 0.0;
  double kappa_F = 0.0;
  double eps_min = 0.0;
  double eps_pi_min = 0.0;  // min_j eps_j^pi_j
  double f0_minus_flow = 0.0;
  double N1 = 0.0;  // value evaluations
  double N2 = 0.0;  // derivative evaluations

  // Internals needed to evaluate kappa_delta at any sigma.
  double theta = 0.5;
  double omega = 0.02;

  double kappa_delta(double sigma) const;
  double kappa_step2_at(double sigma) const;
};

/// Evaluates every constant for `config` with problem constants L_f (all
/// derivative orders) and f(x0) - f_low. `L_fp` defaults to L_f.
BoundReport compute_bounds(const SolverConfig& config, double L_f, double f0_minus_flow,
                           double L_fp = -1.0);

/// Flat "key = value" rendering, one constant per line.
std::string to_text(const BoundReport& report);

}  // namespace arq
