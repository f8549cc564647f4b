#include "arq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "arq/errors.hpp"

namespace arq {

std::string to_string(IterationKind kind) {
  switch (kind) {
    case IterationKind::successful:
      return "S";
    case IterationKind::unsuccessful:
      return "U";
    case IterationKind::accuracy_improving:
      return "A";
  }
  return "?";
}

SolverConfig SolverConfig::resolved() const {
  SolverConfig c = *this;
  if (c.delta0.empty()) c.delta0.assign(std::max(c.q, 0), 1.0);
  if (c.acc0.empty()) c.acc0.assign(std::max(c.p, 0), 0.1);
  if (!c.varsigma) c.varsigma = c.guarantees.min_up_to(std::clamp(c.q, 1, 3));
  return c;
}

double SolverConfig::effective_varsigma() const {
  return varsigma ? *varsigma : guarantees.min_up_to(std::clamp(q, 1, 3));
}

double SolverConfig::eps_min() const {
  return epsilons.empty() ? 0.0 : *std::min_element(epsilons.begin(), epsilons.end());
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid configuration: " + what);
}

}  // namespace

void SolverConfig::validate() const {
  require(q >= 1 && q <= 3, "q must be 1, 2 or 3");
  require(p >= q, "p must be >= q");
  require(p <= 3, "p must be <= 3");
  require(static_cast<int>(epsilons.size()) == q, "need exactly q accuracy levels eps");
  for (double e : epsilons) require(e > 0.0 && e < 1.0, "eps must lie in (0,1)");
  require(sigma0 > 0.0, "sigma0 must be > 0");
  require(sigma_min > 0.0 && sigma_min <= sigma0, "sigma_min must lie in (0, sigma0]");
  require(eta1 > 0.0 && eta1 <= eta2 && eta2 < 1.0, "need 0 < eta1 <= eta2 < 1");
  require(gamma1 > 0.0 && gamma1 < 1.0 && 1.0 < gamma2 && gamma2 < gamma3,
          "need 0 < gamma1 < 1 < gamma2 < gamma3");
  require(gamma_acc > 0.0 && gamma_acc < 1.0, "gamma_acc must lie in (0,1)");
  require(omega > 0.0 && omega < std::min(0.5 * eta1, 0.25 * (1.0 - eta2)),
          "omega must lie in (0, min[eta1/2, (1-eta2)/4])");
  const double vs = effective_varsigma();
  require(vs > 0.0 && vs <= 1.0, "varsigma must lie in (0,1]");
  require(vs <= guarantees.min_up_to(q), "varsigma exceeds what the measure solvers guarantee");
  require(theta > 0.0, "theta must be > 0");
  const std::vector<double> d0 = delta0.empty() ? std::vector<double>(q, 1.0) : delta0;
  require(static_cast<int>(d0.size()) == q, "need exactly q initial radii delta0");
  for (int j = 0; j < q; ++j) require(d0[j] > epsilons[j] && d0[j] <= 1.0, "delta0 must lie in (eps,1]");
  require(acc_max >= 0.0, "acc_max must be >= 0");
  const std::vector<double> a0 = acc0.empty() ? std::vector<double>(p, 0.1) : acc0;
  require(static_cast<int>(a0.size()) == p, "need exactly p initial accuracies acc0");
  for (double a : a0) require(a >= 0.0 && a <= acc_max, "acc0 must lie in [0, acc_max]");
  require(max_iters >= 1, "max_iters must be >= 1");
  require(inner.max_iters >= 1, "inner iteration cap must be >= 1");
}

int SolveResult::count(IterationKind kind) const {
  return static_cast<int>(std::count_if(trace.begin(), trace.end(),
                                        [&](const IterationRecord& r) { return r.kind == kind; }));
}

BudgetExhausted::BudgetExhausted(SolveResult partial)
    : std::runtime_error("iteration budget exhausted after " + std::to_string(partial.trace.size()) +
                         " iterations"),
      partial_(std::move(partial)) {}

double step_check_xi(const SolverConfig& c, int j_k, double delta_jk, double step_norm) {
  const double vs = c.effective_varsigma();
  return vs * c.epsilons.at(j_k - 1) / (2.0 * (1.0 + c.omega)) * factorial(c.p) *
         std::pow(delta_jk, j_k) / (factorial(j_k) * std::pow(std::max(delta_jk, step_norm), c.p));
}

double model_check_xi(const SolverConfig& c, int l) {
  const double vs = c.effective_varsigma();
  return vs * c.theta * (1.0 - c.omega) * c.epsilons.at(l - 1) / (2.0 * std::pow(1.0 + c.omega, 2));
}

double update_sigma(const SolverConfig& c, double sigma, double rho) {
  if (rho >= c.eta2) return std::max(c.sigma_min, c.gamma1 * sigma);
  if (rho >= c.eta1) return sigma;
  return c.gamma2 * sigma;
}

SolverState initial_state(const SolverConfig& c, const Vector& x0) {
  SolverState s;
  s.x = x0;
  s.sigma = c.sigma0;
  s.delta = c.delta0;
  s.delta_start = c.delta0;
  s.delta_end = c.delta0;
  s.accuracy.bounds = c.acc0;
  return s;
}

namespace {

double inexact_model_decrement(const Bundle& b, double sigma, const Vector& s) {
  const int p = b.degree();
  return taylor_decrement(b, s, p) - sigma / factorial(p + 1) * std::pow(s.norm(), p + 1);
}

CheckOutcome record_check(IterationRecord& rec, CheckStage stage, int order, double delta,
                          double decrement, std::vector<double> acc, double xi, double omega) {
  const CheckOutcome out = check(delta, decrement, acc, xi, omega);
  rec.checks.push_back({stage, order, delta, decrement, xi, std::move(acc), out.verdict});
  return out;
}

}  // namespace

Step1Outcome step1(SolverState& st, const Bundle& b, const SolverConfig& c, IterationRecord& rec) {
  st.delta_start = st.delta;
  const double vs = c.effective_varsigma();
  const double w = c.omega;
  double l_local = 1.0;
  for (int i = 1; i <= b.degree(); ++i) l_local = std::max(l_local, operator_norm_upper(b.derivative(i)));

  Certificate cert;
  for (int j = 1; j <= c.q; ++j) {
    const double eps = c.epsilons[j - 1];
    const std::vector<double> acc(st.accuracy.bounds.begin(), st.accuracy.bounds.begin() + j);
    for (;;) {
      double& dj = st.delta[j - 1];
      MeasureResult m = optimality_measure(b, j, dj, c.guarantees);
      const double scale = std::pow(dj, j) / factorial(j);
      const CheckOutcome v = record_check(rec, CheckStage::step1, j, dj, m.phi_bar, acc, 0.5 * eps, w);
      if (!v.sufficient()) {
        st.delta_end = st.delta;
        return {Step1Outcome::Next::step5, j, {}, {}};
      }
      if (m.phi_bar <= vs * eps / (1.0 + w) * scale) {
        cert.phi_bar.push_back(m.phi_bar);
        cert.threshold.push_back(eps * scale);
        break;
      }
      const double dm = inexact_model_decrement(b, st.sigma, m.displacement);
      if (dm >= vs * eps / (2.0 * (1.0 + w)) * scale) {
        st.delta_end = st.delta;
        rec.model_decrement_dk = dm;
        return {Step1Outcome::Next::step2, j, std::move(m.displacement), {}};
      }
      dj *= 0.5;
      const double floor = vs * eps / (4.0 * (1.0 + w) * std::max(l_local, st.sigma));
      if (dj < 1e-3 * floor) {
        std::ostringstream msg;
        msg << "step1: radius for order " << j << " fell to " << dj << ", below 1e-3 x " << floor;
        throw InvariantViolation(msg.str());
      }
    }
  }
  st.delta_end = st.delta;
  cert.x_eps = st.x;
  cert.delta_eps = st.delta;
  cert.epsilons = c.epsilons;
  return {Step1Outcome::Next::terminate, 0, {}, std::move(cert)};
}

Step2Outcome step2(const SolverState& st, const Model& model, int j_k, const Vector& d_k,
                   const SolverConfig& c, IterationRecord& rec) {
  Step2Outcome out;
  const double vs = c.effective_varsigma();
  out.step = minimize_model(model, d_k, c.q, c.theta, c.omega, vs, c.epsilons, c.inner);
  const Vector& s = out.step.step;
  const double sn = s.norm();
  out.taylor_decrement = taylor_decrement(model.bundle, s, c.p);
  rec.step = s;
  rec.step_norm = sn;
  rec.taylor_decrement = out.taylor_decrement;
  rec.model_decrement_step = model_decrement(model, s);
  rec.radii = out.step.radii;

  const double xi = step_check_xi(c, j_k, st.delta_end[j_k - 1], sn);
  if (!record_check(rec, CheckStage::step2_first, c.p, sn, out.taylor_decrement, st.accuracy.bounds, xi,
                    c.omega)
           .sufficient()) {
    out.to_step5 = true;
    return out;
  }
  if (sn >= 1.0) return out;

  const std::vector<double>& acc = st.accuracy.bounds;
  for (int l = 1; l <= c.q; ++l) {
    const double radius = out.step.radii->at(l - 1);
    const Bundle shifted = shifted_model_bundle(model, s, l);
    const double dec = std::max(0.0, taylor_decrement(shifted, out.step.inner_displacements.at(l - 1), l));
    const double worst = *std::max_element(acc.begin() + (l - 1), acc.end());
    const std::vector<double> tripled(l, 3.0 * worst);
    if (!record_check(rec, CheckStage::step2_model, l, radius, dec, tripled, model_check_xi(c, l), c.omega)
             .sufficient()) {
      out.to_step5 = true;
      return out;
    }
  }
  return out;
}

void step3_step4(SolverState& st, Oracle& oracle, const SolverConfig& c, const Step2Outcome& step,
                 IterationRecord& rec) {
  const Vector& s = step.step.step;
  const double dT = step.taylor_decrement;
  const double bound = c.omega * dT;
  const Vector trial = st.x + s;
  const double f_plus = oracle.inexact_value(trial, bound);
  rec.f_bar_reused = st.f_bar.has_value() && st.f_bar_bound <= bound;
  if (!rec.f_bar_reused) {
    st.f_bar = oracle.inexact_value(st.x, bound);
    st.f_bar_bound = bound;
  }
  rec.value_bound = bound;
  rec.f_bar_before = *st.f_bar;
  rec.f_bar_after = f_plus;
  const double rho = (*st.f_bar - f_plus) / dT;
  rec.rho = rho;
  if (rho >= c.eta1) {
    st.x = trial;
    st.delta = s.norm() < 1.0 ? *step.step.radii : st.delta_end;
    st.f_bar = f_plus;
    st.f_bar_bound = bound;
    rec.kind = IterationKind::successful;
  } else {
    st.delta = st.delta_end;
    rec.kind = IterationKind::unsuccessful;
  }
  st.sigma = update_sigma(c, st.sigma, rho);
}

void step5(SolverState& st, const SolverConfig& c) {
  st.accuracy.improve(c.gamma_acc);
  st.delta = st.delta_start;
}

SolveResult solve(const Problem& problem, const NoiseModel& noise, const SolverConfig& config,
                  const Vector& x0_in, const IterationObserver& observer) {
  const SolverConfig c = config.resolved();
  c.validate();
  if (problem.max_order < c.p) throw ConfigError("invalid configuration: p exceeds the problem's derivative order");
  const Vector x0 = x0_in.size() > 0 ? x0_in : problem.x0;
  if (x0.size() != problem.dim) throw std::invalid_argument("solve: starting point has wrong dimension");

  Oracle oracle(problem, noise);
  SolverState st = initial_state(c, x0);
  SolveResult result;
  result.config = c;
  result.sigma_max_observed = st.sigma;

  auto finish = [&](IterationRecord& rec) {
    rec.sigma_next = st.sigma;
    rec.delta_start = st.delta_start;
    rec.delta_end = st.delta_end;
    oracle.close_iteration();
    const auto& last = oracle.counters().per_iteration.back();
    rec.value_evals = last.value_evals;
    rec.derivative_evals = last.derivative_evals;
    rec.value_evals_cum = oracle.counters().value_evals;
    rec.derivative_evals_cum = oracle.counters().derivative_evals;
    result.sigma_max_observed = std::max(result.sigma_max_observed, st.sigma);
    if (observer) observer(rec);
    result.trace.push_back(std::move(rec));
  };
  auto snapshot = [&] {
    result.counters = oracle.counters();
    result.x_final = st.x;
    result.accuracy_improvements = st.accuracy.improvements;
  };

  for (;;) {
    if (st.k >= c.max_iters) {
      snapshot();
      throw BudgetExhausted(std::move(result));
    }
    IterationRecord rec;
    rec.k = st.k;
    rec.x = st.x;
    rec.sigma = st.sigma;
    rec.accuracy = st.accuracy.bounds;
    const Bundle bundle = oracle.inexact_bundle(st.x, st.accuracy.bounds, c.p);

    Step1Outcome s1 = step1(st, bundle, c, rec);
    if (s1.next == Step1Outcome::Next::terminate) {
      finish(rec);
      result.certificate = std::move(s1.certificate);
      break;
    }
    bool improve = s1.next == Step1Outcome::Next::step5;
    if (!improve) {
      rec.j_k = s1.j_k;
      const Model model{bundle, st.sigma};
      const Step2Outcome s2 = step2(st, model, s1.j_k, s1.d_k, c, rec);
      improve = s2.to_step5;
      if (!improve) step3_step4(st, oracle, c, s2, rec);
    }
    if (improve) {
      step5(st, c);
      rec.kind = IterationKind::accuracy_improving;
    }
    finish(rec);
    ++st.k;
  }
  snapshot();
  return result;
}

}  // namespace arq
