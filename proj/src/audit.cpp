#include "arq/audit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace arq {

namespace {

// Frobenius norm of the fourth derivative from central differences of the third.
double fourth_derivative_norm(const Problem& problem, const Vector& x) {
  const double h = 1e-4 * std::max(1.0, x.norm());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const Tensor slice = (problem.derivative(xp, 3) - problem.derivative(xm, 3)) * (1.0 / (2.0 * h));
    sum += slice.data().squaredNorm();
  }
  return std::sqrt(sum);
}

}  // namespace

LipschitzEstimate estimate_lipschitz(const Problem& problem, const std::vector<Vector>& points, int p) {
  LipschitzEstimate est;
  est.per_order.assign(p + 1, 0.0);
  for (const Vector& x : points) {
    for (int j = 0; j <= p; ++j) {
      const double norm = j + 1 <= 3 ? operator_norm_upper(problem.derivative(x, j + 1))
                                     : fourth_derivative_norm(problem, x);
      est.per_order[j] = std::max(est.per_order[j], norm);
    }
  }
  for (double& l : est.per_order) l = std::max(l, 1.0);
  est.L_f = *std::max_element(est.per_order.begin(), est.per_order.end());
  est.L_fp = est.per_order[p];
  return est;
}

std::vector<Vector> visited_points(const SolveResult& run, int samples_per_step) {
  std::vector<Vector> pts;
  for (const IterationRecord& r : run.trace) {
    pts.push_back(r.x);
    if (!r.step) continue;
    for (int i = 1; i <= samples_per_step; ++i) pts.push_back(r.x + (double(i) / samples_per_step) * *r.step);
  }
  if (run.x_final.size() > 0) pts.push_back(run.x_final);
  return pts;
}

std::vector<Vector> ball_samples(const Vector& center, double radius, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = static_cast<int>(center.size());
  std::vector<Vector> pts{center};
  for (int k = 0; k < count; ++k) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng);
    pts.push_back(center + radius * std::pow(unif(rng), 1.0 / n) / u.norm() * u);
  }
  return pts;
}

int AuditReport::total_violations() const {
  return relative_error_violations + sigma_violations + accounting_violations + model_decrease_violations +
         step_bound_violations + radii_floor_violations + global_radii_floor_violations +
         function_decrease_violations + value_eval_violations + step5_budget_violations +
         eval_bound_violations + first_check_absolute + exact_degeneration_violations;
}

AuditReport audit_run(const Problem& problem, const NoiseModel& noise, const SolveResult& run) {
  AuditReport a;
  const SolverConfig& c = run.config;
  const int p = c.p;
  if (run.trace.empty()) return a;

  a.lipschitz = estimate_lipschitz(problem, visited_points(run), p);
  const Vector& x0 = run.trace.front().x;
  a.bounds = compute_bounds(c, a.lipschitz.L_f, std::max(0.0, problem.value(x0) - problem.f_low), a.lipschitz.L_fp);
  const BoundReport& b = a.bounds;

  auto note = [&](int& counter, const std::string& what, int k) {
    ++counter;
    if (a.messages.size() < 50) a.messages.push_back("k=" + std::to_string(k) + ": " + what);
  };

  const double vs = c.effective_varsigma();
  const double lbar = b.L_bar_f;
  const double log_ratio = std::abs(std::log(c.gamma1)) / std::log(c.gamma2);
  const bool exact_run = noise.kind == NoiseKind::exact &&
                         std::all_of(c.acc0.begin(), c.acc0.end(), [](double v) { return v == 0.0; });
  int n_s = 0, n_t = 0, n_a = 0;
  double sigma_seen = c.sigma0;

  for (std::size_t i = 0; i < run.trace.size(); ++i) {
    const IterationRecord& r = run.trace[i];
    const int k = r.k;
    const bool in_t = r.kind == IterationKind::successful || r.kind == IterationKind::unsuccessful;

    for (double s : {r.sigma, r.sigma_next})
      if (s > b.sigma_max) note(a.sigma_violations, "sigma above sigma_max", k);

    if (r.j_k) {
      const int j = *r.j_k;
      const double floor = std::min(vs * c.epsilons[j - 1] / (8.0 * (1.0 + c.omega) * std::max(lbar, r.sigma)),
                                    r.delta_start[j - 1]);
      if (r.delta_end[j - 1] < floor) note(a.radii_floor_violations, "Step-2 radius below its floor", k);
    }

    for (const CheckRecord& ch : r.checks) {
      if (ch.stage == CheckStage::step2_first && ch.verdict == Verdict::absolute)
        note(a.first_check_absolute, "first Step-2 check returned absolute", k);
      if (exact_run && ch.decrement > 0.0 && ch.verdict != Verdict::relative)
        note(a.exact_degeneration_violations, "non-relative verdict with exact derivatives", k);
    }
    if (exact_run && r.kind == IterationKind::accuracy_improving)
      note(a.exact_degeneration_violations, "accuracy-improving iteration with exact derivatives", k);

    if (in_t) {
      ++a.step3_runs;
      const Vector& s = *r.step;
      const double sn = s.norm();
      const double dT_bar = *r.taylor_decrement;
      const Bundle exact = problem.exact_bundle(r.x, p);
      const double dT = taylor_decrement(exact, s, p);
      if (!(std::abs(dT_bar - dT) <= c.omega * dT_bar)) {
        std::ostringstream m;
        m << "relative error " << std::abs(dT_bar - dT) << " > omega * " << dT_bar;
        note(a.relative_error_violations, m.str(), k);
      }
      if (!(dT_bar >= r.sigma * std::pow(sn, p + 1) / factorial(p + 1)))
        note(a.model_decrease_violations, "Taylor decrement below the regularization term", k);
      if (sn > b.kappa_s) note(a.step_bound_violations, "step longer than kappa_s", k);
      if (r.value_evals > 2) note(a.value_eval_violations, "more than two value evaluations", k);
    }
    if (r.kind == IterationKind::successful) {
      ++n_s;
      const Vector& next = i + 1 < run.trace.size() ? run.trace[i + 1].x : run.x_final;
      const double decrease = problem.value(r.x) - problem.value(next);
      if (decrease < (c.eta1 - 2.0 * c.omega) * *r.taylor_decrement)
        note(a.function_decrease_violations, "function decrease below (eta1 - 2 omega) x Taylor decrement", k);
    }
    if (in_t) ++n_t;
    if (r.kind == IterationKind::accuracy_improving) ++n_a;

    sigma_seen = std::max({sigma_seen, r.sigma, r.sigma_next});
    if (r.kind && n_t > n_s * (1.0 + log_ratio) + std::log(sigma_seen / c.sigma0) / std::log(c.gamma2) + 1e-9)
      note(a.accounting_violations, "too many unsuccessful iterations", k);

    if (r.kind && i + 1 < run.trace.size()) {
      const std::vector<double>& next_start = run.trace[i + 1].delta_start;
      for (int j = 1; j <= c.q; ++j)
        if (next_start[j - 1] < b.kappa_delta(sigma_seen) * c.epsilons[j - 1])
          note(a.global_radii_floor_violations, "radius below kappa_delta x eps", k);
    }
  }

  if (n_a > b.k_acc_min) note(a.step5_budget_violations, "accuracy-improving count above k_acc_min", n_a);
  if (run.counters.value_evals > b.N1) note(a.eval_bound_violations, "value evaluations above N1", 0);
  if (run.counters.derivative_evals > b.N2) note(a.eval_bound_violations, "derivative evaluations above N2", 0);
  return a;
}

}  // namespace arq
