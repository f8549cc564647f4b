#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arq/check.hpp"
#include "arq/oracle.hpp"
#include "arq/subsolvers.hpp"

namespace arq {

struct SolverConfig {
  int p = 2;
  int q = 1;
  std::vector<double> epsilons{1e-3};
  double sigma0 = 1.0;
  double sigma_min = 1e-8;
  double eta1 = 0.1;
  double eta2 = 0.9;
  double gamma1 = 0.5;
  double gamma2 = 2.0;
  double gamma3 = 4.0;
  double gamma_acc = 0.25;
  double omega = 0.02;
  std::optional<double> varsigma;  // defaults to the weakest measure guarantee for orders 1..q
  double theta = 0.5;
  std::vector<double> delta0;  // defaults to all ones
  std::vector<double> acc0;    // defaults to 0.1 for every order
  double acc_max = 1.0;
  int max_iters = 10000;
  Guarantees guarantees;
  InnerOptions inner;

  /// Copy with every defaulted field filled in.
  SolverConfig resolved() const;
  /// Throws ConfigError on any violated parameter constraint.
  void validate() const;
  double effective_varsigma() const;
  double eps_min() const;
};

enum class IterationKind { successful, unsuccessful, accuracy_improving };

/// "S", "U" or "A".
std::string to_string(IterationKind kind);

enum class CheckStage { step1, step2_first, step2_model };

struct CheckRecord {
  CheckStage stage = CheckStage::step1;
  int order = 1;
  double delta = 0.0;
  double decrement = 0.0;
  double xi = 0.0;
  std::vector<double> accuracies;
  Verdict verdict = Verdict::insufficient;
};

struct IterationRecord {
  int k = 0;
  std::optional<IterationKind> kind;  // absent on the terminating row
  Vector x;
  double sigma = 0.0;
  double sigma_next = 0.0;
  std::optional<double> rho;
  std::optional<Vector> step;
  std::optional<double> step_norm;
  std::optional<int> j_k;
  std::vector<double> delta_start;
  std::vector<double> delta_end;
  std::vector<double> accuracy;
  std::optional<double> taylor_decrement;  // inexact T_p decrement along the step
  std::optional<double> model_decrement_dk;
  std::optional<double> model_decrement_step;
  std::optional<std::vector<double>> radii;
  std::optional<double> f_bar_before;
  std::optional<double> f_bar_after;
  std::optional<double> value_bound;  // bound requested for both value evaluations
  bool f_bar_reused = false;
  std::vector<CheckRecord> checks;
  long value_evals = 0;
  long derivative_evals = 0;
  long value_evals_cum = 0;
  long derivative_evals_cum = 0;
};

struct Certificate {
  Vector x_eps;
  std::vector<double> delta_eps;
  std::vector<double> epsilons;
  std::vector<double> phi_bar;
  std::vector<double> threshold;  // eps_j delta_j^j / j!
  std::optional<std::vector<std::optional<bool>>> verified_exact;
};

struct SolveResult {
  std::optional<Certificate> certificate;
  EvalCounters counters;
  std::vector<IterationRecord> trace;
  SolverConfig config;  // resolved
  Vector x_final;
  double sigma_max_observed = 0.0;
  int accuracy_improvements = 0;

  int count(IterationKind kind) const;
};

/// Thrown when max_iters is reached; carries the partial run.
class BudgetExhausted : public std::runtime_error {
 public:
  explicit BudgetExhausted(SolveResult partial);
  const SolveResult& partial() const { return partial_; }

 private:
  SolveResult partial_;
};

struct SolverState {
  Vector x;
  double sigma = 1.0;
  std::vector<double> delta;        // current radii
  std::vector<double> delta_start;  // radii at the start of Step 1
  std::vector<double> delta_end;    // radii at the end of Step 1
  AccuracyState accuracy;
  int k = 0;
  std::optional<double> f_bar;  // inexact value at x
  double f_bar_bound = 0.0;     // error bound f_bar was computed to
};

/// State at k = 0 for a resolved, validated config.
SolverState initial_state(const SolverConfig& config, const Vector& x0);

struct Step1Outcome {
  enum class Next { terminate, step2, step5 } next = Next::step5;
  int j_k = 0;
  Vector d_k;
  std::optional<Certificate> certificate;
};

/// Optimality measures with radius halving for orders 1..q at the current bundle.
Step1Outcome step1(SolverState& state, const Bundle& bundle, const SolverConfig& config,
                   IterationRecord& record);

struct Step2Outcome {
  bool to_step5 = false;
  StepResult step;
  double taylor_decrement = 0.0;
};

Step2Outcome step2(const SolverState& state, const Model& model, int j_k, const Vector& d_k,
                   const SolverConfig& config, IterationRecord& record);

/// Trial value, acceptance and sigma update.
void step3_step4(SolverState& state, Oracle& oracle, const SolverConfig& config,
                 const Step2Outcome& step, IterationRecord& record);

/// Tightens every accuracy by gamma_acc and restores the Step-1 radii.
void step5(SolverState& state, const SolverConfig& config);

using IterationObserver = std::function<void(const IterationRecord&)>;

/// Runs the adaptive regularization method from `x0` (problem.x0 if empty).
SolveResult solve(const Problem& problem, const NoiseModel& noise, const SolverConfig& config,
                  const Vector& x0 = Vector(), const IterationObserver& observer = {});

/// Threshold xi passed with the trial step to the first Step-2 check.
double step_check_xi(const SolverConfig& config, int j_k, double delta_jk, double step_norm);
/// Threshold xi passed with the order-l inner model decrement.
double model_check_xi(const SolverConfig& config, int l);

/// Lower endpoint of the admissible sigma interval for the given ratio.
double update_sigma(const SolverConfig& config, double sigma, double rho);

}  // namespace arq
