#include "arq/subsolvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "arq/errors.hpp"
#include "arq/trust_region.hpp"

namespace arq {

double Guarantees::min_up_to(int q) const {
  double m = 1.0;
  for (int j = 1; j <= q; ++j) m = std::min(m, for_order(j));
  return m;
}

namespace {

Vector project_to_ball(Vector d, double delta) {
  const double n = d.norm();
  if (n > delta) d *= delta / n;
  return d;
}

// T_3 increment g.d + d^T H d / 2 + T[d]^3 / 6 and its gradient.
struct CubicTaylor {
  const Bundle& b;

  double value(const Vector& d) const { return -taylor_decrement(b, d, 3); }

  Vector gradient(const Vector& d) const {
    return b.derivative(1).as_vector() + b.derivative(2).as_matrix() * d +
           0.5 * b.derivative(3).contract(d, 2).as_vector();
  }
};

Vector projected_descent(const CubicTaylor& t, Vector d, double delta) {
  double step = 1.0;
  double f = t.value(d);
  for (int it = 0; it < 200; ++it) {
    const Vector g = t.gradient(d);
    if (g.norm() == 0.0) break;
    if (it == 0) step = delta / g.norm();
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector trial = project_to_ball(d - step * g, delta);
      const double ft = t.value(trial);
      const double move2 = (trial - d).squaredNorm();
      if (ft <= f - 1e-4 / step * move2) {
        moved = move2 > 0.0;
        const bool small = std::sqrt(move2) <= 1e-12 * delta;
        d = trial;
        f = ft;
        step *= 2.0;
        if (small) moved = false;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return d;
}

MeasureResult make_measure(const Bundle& b, int j, Vector d, double guarantee) {
  MeasureResult r;
  r.guarantee = guarantee;
  const double dec = taylor_decrement(b, d, j);
  if (dec > 0.0) {
    r.phi_bar = dec;
    r.displacement = std::move(d);
  } else {
    r.displacement = Vector::Zero(b.dim());
  }
  return r;
}

}  // namespace

MeasureResult optimality_measure(const Bundle& bundle, int j, double delta,
                                 const Guarantees& guarantees, int starts) {
  if (j < 1 || j > bundle.degree() || j > 3)
    throw std::invalid_argument("optimality_measure: order out of range");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("optimality_measure: delta must lie in (0,1]");
  const int n = bundle.dim();
  const Vector g = bundle.derivative(1).as_vector();

  if (j == 1) {
    const double gn = g.norm();
    Vector d = gn > 0.0 ? Vector(-delta / gn * g) : Vector::Zero(n);
    return make_measure(bundle, 1, std::move(d), guarantees.order1);
  }

  const Matrix h = bundle.derivative(2).as_matrix();
  const TrustRegionSolution trs = solve_trust_region(g, h, delta);
  if (j == 2) return make_measure(bundle, 2, trs.step, guarantees.order2);

  const CubicTaylor t{bundle};
  std::vector<Vector> seeds;
  seeds.push_back(trs.step);
  if (g.norm() > 0.0) seeds.push_back(-delta / g.norm() * g);
  for (int i = 0; i < n; ++i) {
    seeds.push_back(delta * Vector::Unit(n, i));
    seeds.push_back(-delta * Vector::Unit(n, i));
  }
  std::mt19937_64 rng(0x6d5a11ULL + static_cast<std::uint64_t>(n));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (static_cast<int>(seeds.size()) < starts) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng);
    seeds.push_back(delta * std::pow(unif(rng), 1.0 / n) / u.norm() * u);
  }
  seeds.resize(std::max(1, starts));

  Vector best = Vector::Zero(n);
  double best_value = 0.0;
  for (const Vector& s : seeds) {
    const Vector d = projected_descent(t, project_to_ball(s, delta), delta);
    const double v = t.value(d);
    if (v < best_value || (v == best_value && lexicographically_greater(d, best))) {
      best = d;
      best_value = v;
    }
  }
  return make_measure(bundle, 3, project_to_ball(best, delta), guarantees.order3);
}

double inner_test_constant(double theta, double omega, double varsigma) {
  return varsigma * theta * (1.0 - omega) / ((1.0 + omega) * 2.0);
}

namespace {

bool passes_inner_test(const MeasureResult& m, int l, double delta, double epsilon, double c) {
  return m.phi_bar <= c * epsilon * std::pow(delta, l) / factorial(l);
}

std::optional<std::pair<double, MeasureResult>> find_radius(const Model& model, const Vector& s,
                                                            int l, double epsilon, double c,
                                                            double cap, const InnerOptions& opt) {
  const Bundle shifted = shifted_model_bundle(model, s, l);
  for (double delta = cap; delta >= opt.radius_floor; delta *= 0.5) {
    MeasureResult m = optimality_measure(shifted, l, delta, opt.guarantees);
    if (passes_inner_test(m, l, delta, epsilon, c)) return std::make_pair(delta, std::move(m));
  }
  return std::nullopt;
}

}  // namespace

std::pair<double, MeasureResult> radius_search(const Model& model, const Vector& s, int l,
                                               double epsilon_l, double theta, double omega,
                                               double varsigma, double delta_cap,
                                               const InnerOptions& options) {
  if (l < 3) throw std::invalid_argument("radius_search: only used for orders >= 3");
  if (!(delta_cap > 0.0 && delta_cap <= 1.0)) throw std::invalid_argument("radius_search: cap must lie in (0,1]");
  const double c = inner_test_constant(theta, omega, varsigma);
  auto found = find_radius(model, s, l, epsilon_l, c, delta_cap, options);
  if (!found) {
    std::ostringstream msg;
    msg << "radius_search: no radius above " << options.radius_floor << " passes the order-" << l
        << " test at ||s|| = " << s.norm();
    throw SolverStall(msg.str());
  }
  return *found;
}

StepResult minimize_model(const Model& model, const Vector& warm_start, int q, double theta,
                          double omega, double varsigma, const std::vector<double>& epsilons,
                          const InnerOptions& options) {
  if (q < 1 || q > model.degree() || q > 3) throw std::invalid_argument("minimize_model: q out of range");
  if (static_cast<int>(epsilons.size()) != q) throw std::invalid_argument("minimize_model: need q epsilons");
  if (warm_start.size() != model.bundle.dim()) throw std::invalid_argument("minimize_model: dimension mismatch");
  double dec = model_decrement(model, warm_start);
  if (!(dec > 0.0)) throw std::invalid_argument("minimize_model: warm start must decrease the model");

  const double c = inner_test_constant(theta, omega, varsigma);
  Vector s = warm_start;
  double tr = std::max(1.0, s.norm());

  auto long_step = [&](int it) {
    StepResult r;
    r.step = s;
    r.long_step = true;
    r.inner_iterations = it;
    return r;
  };

  for (int it = 0;; ++it) {
    StepResult r;
    r.step = s;
    r.inner_iterations = it;
    r.long_step = s.norm() >= 1.0;
    bool low_ok = true;
    std::vector<double> radii;
    const int low = std::min(q, 2);
    const Bundle shifted = shifted_model_bundle(model, s, low);
    for (int l = 1; l <= low && low_ok; ++l) {
      MeasureResult m = optimality_measure(shifted, l, 1.0, options.guarantees);
      low_ok = passes_inner_test(m, l, 1.0, epsilons[l - 1], c);
      radii.push_back(1.0);
      r.inner_displacements.push_back(std::move(m.displacement));
    }
    if (low_ok) {
      if (q <= 2) {
        r.radii = radii;
        return r;
      }
      if (r.long_step) return long_step(it);
      if (auto found = find_radius(model, s, 3, epsilons[2], c, options.radius_cap, options)) {
        radii.push_back(found->first);
        r.inner_displacements.push_back(std::move(found->second.displacement));
        r.radii = radii;
        return r;
      }
    }

    auto stall = [&](const char* why) -> StepResult {
      if (s.norm() >= 1.0) return long_step(it);
      std::ostringstream msg;
      msg << "minimize_model: " << why << " after " << it << " inner iterations (||s|| = " << s.norm()
          << ", ||grad m|| = " << model_derivative(model, s, 1).as_vector().norm() << ")";
      throw SolverStall(msg.str());
    };
    if (it >= options.max_iters) return stall("iteration cap reached");

    const Vector g = model_derivative(model, s, 1).as_vector();
    const Matrix h = model_derivative(model, s, 2).as_matrix();
    bool accepted = false;
    while (!accepted) {
      const TrustRegionSolution trs = solve_trust_region(g, h, tr);
      const double predicted = -trs.value;
      if (!(predicted > 0.0)) return stall("no predicted model decrease");
      const Vector trial = s + trs.step;
      const double trial_dec = model_decrement(model, trial);
      const double actual = trial_dec - dec;
      if (actual > 0.0 && actual >= 0.1 * predicted) {
        s = trial;
        dec = trial_dec;
        if (actual >= 0.75 * predicted && trs.step.norm() >= 0.99 * tr) tr *= 2.0;
        accepted = true;
      } else {
        tr = 0.25 * trs.step.norm();
        if (tr <= 1e-15 * std::max(1.0, s.norm())) return stall("trust region collapsed");
      }
    }
  }
}

}  // namespace arq
