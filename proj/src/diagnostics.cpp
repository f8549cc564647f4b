#include "arq/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "arq/errors.hpp"

namespace arq {

double BoundReport::kappa_delta(double sigma) const {
  return varsigma * theta * (1.0 - omega) / (8.0 * (1.0 + omega) * (3.0 * L_bar_f + sigma));
}

double BoundReport::kappa_step2_at(double sigma) const {
  const double kd = kappa_delta(sigma);
  const double first = 1.0 / std::max(1.0, std::pow(kappa_s, p));
  const double second = theta * (1.0 - omega) / (3.0 * (1.0 + omega));
  return varsigma * omega * std::pow(kd, q) / (4.0 * factorial(q) * (1.0 + omega)) * std::min(first, second);
}

BoundReport compute_bounds(const SolverConfig& config, double L_f, double f0_minus_flow, double L_fp) {
  const SolverConfig c = config.resolved();
  c.validate();
  if (!(c.theta < 1.0)) throw ConfigError("invalid configuration: the bounds need theta < 1");
  if (!(L_f >= 1.0)) throw std::invalid_argument("compute_bounds: L_f must be >= 1");
  if (!(f0_minus_flow >= 0.0)) throw std::invalid_argument("compute_bounds: f(x0) - f_low must be >= 0");
  if (L_fp < 0.0) L_fp = L_f;

  BoundReport r;
  const int p = c.p, q = c.q;
  const double w = c.omega;
  r.p = p;
  r.q = q;
  r.varsigma = c.effective_varsigma();
  r.theta = c.theta;
  r.omega = w;
  r.L_f = L_f;
  r.L_fp = L_fp;
  r.acc_max = c.acc_max;
  r.L_bar_f = L_f + c.acc_max;
  r.sigma_max = std::max(c.sigma0, c.gamma3 * 4.0 * L_fp / (1.0 - c.eta2));

  const double base = 2.0 * r.L_bar_f * factorial(p + 1) / c.sigma_min;
  r.kappa_s = std::max(base, std::pow(base, 1.0 / p));
  r.kappa_delta_min = r.kappa_delta(r.sigma_max);

  const double vs = r.varsigma;
  const double common = vs * (1.0 - c.theta) * (1.0 - w);
  const double lead = c.sigma_min / factorial(p + 1);
  if (q <= 2) {
    r.kappa_dm = lead * std::pow(common / (2.0 * factorial(q) * (L_fp + r.sigma_max) * (1.0 + w)),
                                 (p + 1.0) / (p - q + 1.0));
  } else {
    r.kappa_dm = lead * std::pow(common * std::pow(r.kappa_delta_min, q - 1) /
                                     (2.0 * factorial(q) * (L_fp + r.sigma_max) * (1.0 + w)),
                                 q * (p + 1.0) / p);
  }

  r.eps_min = c.eps_min();
  r.eps_pi_min = HUGE_VAL;
  for (int j = 1; j <= q; ++j) {
    const double pij = q <= 2 ? (p + 1.0) / (p - j + 1.0) : j * (p + 1.0) / p;
    r.pi.push_back(pij);
    r.eps_pi_min = std::min(r.eps_pi_min, std::pow(c.epsilons[j - 1], pij));
    const double eps = c.epsilons[j - 1];
    const double denom = 2.0 * factorial(j) * (L_fp + r.sigma_max) * (1.0 + w);
    if (q <= 2) {
      r.step_lower_bounds.push_back(std::pow(common / denom, 1.0 / (p - j + 1.0)) *
                                    std::pow(eps, 1.0 / (p - j + 1.0)));
    } else {
      r.step_lower_bounds.push_back(std::pow(common * std::pow(r.kappa_delta_min, j - 1) / denom, 1.0 / p) *
                                    std::pow(eps, static_cast<double>(j) / p));
    }
  }

  r.kappa_step2 = r.kappa_step2_at(r.sigma_max);
  r.kappa_acc = std::min(vs * w / (4.0 * factorial(q)) * std::pow(r.kappa_delta_min, q - 1), r.kappa_step2);
  if (c.acc_max > 0.0) {
    const double v = ((q + 1) * std::log(r.eps_min) + std::log(r.kappa_acc / c.acc_max)) / std::log(c.gamma_acc);
    r.k_acc_min = std::max(0, static_cast<int>(std::floor(v)));
  }

  const double log_ratio = std::abs(std::log(c.gamma1)) / std::log(c.gamma2);
  if (q <= 2) {
    r.kappa_S = factorial(p + 1) / ((c.eta1 - 2.0 * w) * c.sigma_min) *
                (2.0 * factorial(q) * (L_fp + c.acc_max + r.sigma_max) * (1.0 + w) /
                 ((1.0 - c.theta) * (1.0 - w)));
    r.kappa_A = 2.0 * r.kappa_S * (1.0 + log_ratio);
  } else {
    const int j = q;
    r.kappa_S = factorial(p + 1) / ((c.eta1 - 2.0 * w) * c.sigma_min) *
                std::pow(2.0 * factorial(j) * (L_fp + r.sigma_max) * (1.0 + w) /
                             ((1.0 - c.theta) * (1.0 - w) * std::pow(r.kappa_delta_min, j - 1)),
                         (p + 1.0) / p);
    r.kappa_A = r.kappa_S * (1.0 + log_ratio);
  }
  r.kappa_C = 2.0 / std::log(c.gamma2) * std::log(r.sigma_max / c.sigma0) + 2.0;
  r.kappa_E = (q + 1.0) / std::abs(std::log(c.gamma_acc));
  r.kappa_F = c.acc_max > 0.0
                  ? std::abs(std::log(r.kappa_acc / c.acc_max)) / std::abs(std::log(c.gamma_acc)) + 2.0
                  : 2.0;

  r.f0_minus_flow = f0_minus_flow;
  r.N1 = r.kappa_A * f0_minus_flow / r.eps_pi_min + r.kappa_C;
  r.N2 = r.kappa_S * f0_minus_flow / r.eps_pi_min + r.kappa_E * std::abs(std::log(r.eps_min)) + r.kappa_F;
  return r;
}

std::string to_text(const BoundReport& r) {
  std::ostringstream o;
  o << std::setprecision(12);
  auto list = [&](const std::vector<double>& v) {
    std::ostringstream s;
    s << std::setprecision(12);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  o << "p = " << r.p << "\n"
    << "q = " << r.q << "\n"
    << "varsigma = " << r.varsigma << "\n"
    << "L_f = " << r.L_f << "\n"
    << "L_fp = " << r.L_fp << "\n"
    << "L_bar_f = " << r.L_bar_f << "\n"
    << "sigma_max = " << r.sigma_max << "\n"
    << "kappa_s = " << r.kappa_s << "\n"
    << "kappa_delta_min = " << r.kappa_delta_min << "\n"
    << "kappa_dm = " << r.kappa_dm << "\n"
    << "pi = " << list(r.pi) << "\n"
    << "step_lower_bounds = " << list(r.step_lower_bounds) << "\n"
    << "kappa_step2 = " << r.kappa_step2 << "\n"
    << "kappa_acc = " << r.kappa_acc << "\n"
    << "k_acc_min = " << r.k_acc_min << "\n"
    << "kappa_S = " << r.kappa_S << "\n"
    << "kappa_A = " << r.kappa_A << "\n"
    << "kappa_C = " << r.kappa_C << "\n"
    << "kappa_E = " << r.kappa_E << "\n"
    << "kappa_F = " << r.kappa_F << "\n"
    << "f0_minus_flow = " << r.f0_minus_flow << "\n"
    << "N1 = " << r.N1 << "\n"
    << "N2 = " << r.N2 << "\n";
  return o.str();
}

}  // namespace arq
