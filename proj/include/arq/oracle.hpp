#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "arq/taylor.hpp"

namespace arq {

/// An objective with exact value and derivative callbacks.
struct Problem {
  std::string name;
  int dim = 1;
  int max_order = 3;
  std::function<double(const Vector&)> value;
  std::function<Tensor(const Vector&, int)> derivative;  // exact d^i f(x), 1 <= i <= max_order
  double f_low = 0.0;
  std::optional<double> lipschitz_hint;
  Vector x0;  // default starting point

  /// Exact bundle of orders 1..p with zero accuracy tags.
  Bundle exact_bundle(const Vector& x, int p) const;
};

/// 0.5 x^T A x.
Problem make_quadratic(const Matrix& a, std::string name = "quadratic");
/// 0.5 x^T A x with A = Q diag(linspace(1,10)) Q^T, Q a fixed random rotation.
Problem make_spread_quadratic(int n);
/// Chained Rosenbrock, n >= 2.
Problem make_rosenbrock(int n);
/// sum (x_i^2 - 1)^2.
Problem make_double_well(int n);
/// sum sin(x_i) + 0.5 ||x||^2.
Problem make_sine(int n);

/// Benchmark problems by name: quadratic, rosenbrock, quartic, sine.
Problem make_problem(const std::string& name, int n);
const std::vector<std::string>& benchmark_names();

enum class NoiseKind { exact, truncation, bounded_random };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& s);

struct NoiseModel {
  NoiseKind kind = NoiseKind::exact;
  double fill_fraction = 0.9;
  std::uint64_t seed = 0;
};

/// Absolute accuracy demands {eps_bar_i} for orders 1..p and the
/// improvement counter.
struct AccuracyState {
  std::vector<double> bounds;
  int improvements = 0;

  double max() const;
  /// Multiplies every bound by gamma and bumps the counter.
  void improve(double gamma);
};

struct EvalCounters {
  long value_evals = 0;
  long derivative_evals = 0;
  struct PerIteration {
    long value_evals = 0;
    long derivative_evals = 0;
  };
  std::vector<PerIteration> per_iteration;
};

/// Evaluation oracle honouring explicit absolute accuracy requests.
///
/// Owns the noise generator and the evaluation counters of one run. The most
/// recent bundle is cached: a request at the same point whose bounds are all
/// no tighter than the cached ones is served without re-evaluation.
class Oracle {
 public:
  Oracle(const Problem& problem, NoiseModel noise);

  /// f_bar(x) with |f_bar - f(x)| <= bound.
  double inexact_value(const Vector& x, double bound);

  /// Derivatives of orders 1..p with ||D_i - d^i f(x)|| <= accuracy[i-1].
  const Bundle& inexact_bundle(const Vector& x, const std::vector<double>& accuracy, int p);

  const EvalCounters& counters() const { return counters_; }
  void close_iteration();

  const Problem& problem() const { return *problem_; }
  const NoiseModel& noise() const { return noise_; }

 private:
  Tensor perturb(const Tensor& exact, double bound);
  double perturb_value(double exact, double bound);

  const Problem* problem_;
  NoiseModel noise_;
  std::mt19937_64 rng_;
  EvalCounters counters_;
  EvalCounters::PerIteration mark_;
  std::optional<Vector> cached_x_;
  std::optional<Bundle> cached_;
};

/// Rounds `exact` to the coarsest power-of-ten grid whose error is <= bound.
double truncate_to_bound(double exact, double bound);

}  // namespace arq
