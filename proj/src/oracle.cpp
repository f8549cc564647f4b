#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "arq/oracle.hpp"

namespace arq {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::exact:
      return "exact";
    case NoiseKind::truncation:
      return "truncation";
    case NoiseKind::bounded_random:
      return "bounded_random";
  }
  return "?";
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "exact") return NoiseKind::exact;
  if (s == "truncation") return NoiseKind::truncation;
  if (s == "bounded_random" || s == "random") return NoiseKind::bounded_random;
  throw std::invalid_argument("unknown noise model '" + s + "'");
}

double AccuracyState::max() const {
  return bounds.empty() ? 0.0 : *std::max_element(bounds.begin(), bounds.end());
}

void AccuracyState::improve(double gamma) {
  for (double& b : bounds) b *= gamma;
  ++improvements;
}

double truncate_to_bound(double exact, double bound) {
  if (!(bound > 0.0) || !std::isfinite(exact)) return exact;
  int e = static_cast<int>(std::ceil(std::log10(bound))) + 1;
  for (; e > -320; --e) {
    const double h = std::pow(10.0, e);
    const double r = std::round(exact / h) * h;
    if (std::isfinite(r) && std::abs(r - exact) <= bound) return r;
  }
  return exact;
}

namespace {

// Entry-wise rounding to a power-of-ten grid, coarsest grid whose error
// tensor has induced norm (upper bound) <= bound. Rounding acts identically on
// equal entries, so symmetry is preserved.
Tensor truncate_tensor(const Tensor& exact, double bound) {
  if (!(bound > 0.0)) return exact;
  const double scale = std::max(exact.data().cwiseAbs().maxCoeff(), bound);
  int e = static_cast<int>(std::ceil(std::log10(scale))) + 1;
  for (; e > -320; --e) {
    const double h = std::pow(10.0, e);
    Tensor r = exact;
    for (Eigen::Index i = 0; i < r.data().size(); ++i) r.data()[i] = std::round(exact.data()[i] / h) * h;
    if (operator_norm_upper(r - exact) <= bound) return r;
  }
  return exact;
}

}  // namespace

Oracle::Oracle(const Problem& problem, NoiseModel noise)
    : problem_(&problem), noise_(noise), rng_(noise.seed) {
  if (noise_.fill_fraction < 0.0 || noise_.fill_fraction > 1.0)
    throw std::invalid_argument("fill_fraction must lie in [0,1]");
}

double Oracle::perturb_value(double exact, double bound) {
  switch (noise_.kind) {
    case NoiseKind::exact:
      return exact;
    case NoiseKind::truncation:
      return truncate_to_bound(exact, bound);
    case NoiseKind::bounded_random: {
      const double sign = std::bernoulli_distribution(0.5)(rng_) ? 1.0 : -1.0;
      const double noisy = exact + sign * noise_.fill_fraction * bound;
      return std::abs(noisy - exact) <= bound ? noisy : exact;
    }
  }
  return exact;
}

Tensor Oracle::perturb(const Tensor& exact, double bound) {
  if (noise_.kind == NoiseKind::exact || !(bound > 0.0)) return exact;
  if (noise_.kind == NoiseKind::truncation) return truncate_tensor(exact, bound);

  const double target = noise_.fill_fraction * bound;
  if (target == 0.0) return exact;
  const int n = exact.dim();
  std::normal_distribution<double> normal;
  Tensor err(exact.order(), n);
  if (exact.order() == 1) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng_);
    err = Tensor::from_vector(u);
  } else if (exact.order() == 2) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = normal(rng_);
    err = Tensor::from_matrix(g);
  } else {
    // rank-one symmetric direction: its induced norm is known exactly
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng_);
    u /= u.norm();
    err = Tensor::outer_power(u, exact.order());
    if (std::bernoulli_distribution(0.5)(rng_)) err *= -1.0;
  }
  const double norm = exact.order() <= 2 ? operator_norm(err) : 1.0;
  if (!(norm > 0.0)) return exact;
  err *= target / norm;
  Tensor noisy = exact + err;
  // guard against rounding in the sum pushing the realized error over the bound
  if (exact.order() <= 2 && operator_norm(noisy - exact) > bound) return exact;
  return noisy;
}

double Oracle::inexact_value(const Vector& x, double bound) {
  if (!(bound >= 0.0)) throw std::invalid_argument("inexact_value: bound must be >= 0");
  if (x.size() != problem_->dim) throw std::invalid_argument("inexact_value: dimension mismatch");
  ++counters_.value_evals;
  return perturb_value(problem_->value(x), bound);
}

const Bundle& Oracle::inexact_bundle(const Vector& x, const std::vector<double>& accuracy, int p) {
  if (x.size() != problem_->dim) throw std::invalid_argument("inexact_bundle: dimension mismatch");
  if (static_cast<int>(accuracy.size()) != p) throw std::invalid_argument("inexact_bundle: need p accuracies");
  if (cached_ && cached_->degree() == p && *cached_x_ == x) {
    bool loose_enough = true;
    for (int i = 0; i < p; ++i) loose_enough = loose_enough && accuracy[i] >= cached_->accuracy[i];
    if (loose_enough) return *cached_;
  }
  Bundle b;
  // the value slot is unused by decrements; f_bar comes from inexact_value()
  b.value = 0.0;
  for (int i = 1; i <= p; ++i) b.tensors.push_back(perturb(problem_->derivative(x, i), accuracy[i - 1]));
  b.accuracy = accuracy;
  ++counters_.derivative_evals;
  cached_x_ = x;
  cached_ = std::move(b);
  return *cached_;
}

void Oracle::close_iteration() {
  counters_.per_iteration.push_back({counters_.value_evals - mark_.value_evals,
                                     counters_.derivative_evals - mark_.derivative_evals});
  mark_ = {counters_.value_evals, counters_.derivative_evals};
}

}  // namespace arq
