#pragma once

// Reference computations written independently of the library code paths.
// They are slow on purpose: explicit loops, brute-force grids, finite
// differences.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "arq/diagnostics.hpp"
#include "arq/taylor.hpp"

namespace oracle {

using arq::Bundle;
using arq::Matrix;
using arq::Tensor;
using arq::Vector;

inline double fact(int k) { return std::tgamma(k + 1.0); }

// T[s]^k by summing T(i1..ik) s_i1 ... s_ik over every full multi-index.
inline double full_contraction(const Tensor& t, const Vector& s) {
  const int n = t.dim(), k = t.order();
  long total = 1;
  for (int i = 0; i < k; ++i) total *= n;
  double sum = 0.0;
  for (long flat = 0; flat < total; ++flat) {
    long rest = flat;
    double term = t.data()[flat];
    for (int i = 0; i < k; ++i) {
      term *= s[rest % n];
      rest /= n;
    }
    sum += term;
  }
  return sum;
}

inline double taylor_value(const Bundle& b, const Vector& s, int j) {
  double v = b.value;
  for (int i = 1; i <= j; ++i) v += full_contraction(b.tensors[i - 1], s) / fact(i);
  return v;
}

inline double taylor_decrement(const Bundle& b, const Vector& s, int j) {
  return taylor_value(b, Vector::Zero(s.size()), j) - taylor_value(b, s, j);
}

// Random symmetric tensor with standard normal entries (up to symmetrization).
inline Tensor random_symmetric(int order, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Tensor t(order, n);
  t.for_each_sorted_index([&](const std::vector<int>& idx) { t.set_symmetric(idx, normal(rng)); });
  return t;
}

inline Bundle random_bundle(int p, int n, std::mt19937_64& rng, double scale = 1.0) {
  Bundle b;
  std::normal_distribution<double> normal;
  b.value = normal(rng);
  for (int i = 1; i <= p; ++i) b.tensors.push_back(random_symmetric(i, n, rng) * scale);
  b.accuracy.assign(p, 0.0);
  return b;
}

// Points in the ball of radius delta: the center, random interior points and
// random boundary points, plus +-delta along each axis.
inline std::vector<Vector> ball_points(int n, double delta, int count, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vector> pts{Vector::Zero(n)};
  for (int i = 0; i < n; ++i) {
    pts.push_back(delta * Vector::Unit(n, i));
    pts.push_back(-delta * Vector::Unit(n, i));
  }
  for (int k = 0; k < count; ++k) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng);
    u /= u.norm();
    const double r = k % 2 == 0 ? delta : delta * std::pow(unif(rng), 1.0 / n);
    pts.push_back(r * u);
  }
  return pts;
}

struct GridMax {
  double value = 0.0;
  Vector arg;
};

// max over ||d|| <= delta of -(g.d + d^T H d / 2), n = 2, by a polar grid.
inline GridMax polar_trs(const Vector& g, const Matrix& h, double delta, int angles = 4000, int radii = 100) {
  GridMax best{0.0, Vector::Zero(2)};
  for (int a = 0; a < angles; ++a) {
    const double t = 2.0 * M_PI * a / angles;
    const Vector u(Vector{{std::cos(t), std::sin(t)}});
    for (int r = 1; r <= radii; ++r) {
      const Vector d = (delta * r / radii) * u;
      const double v = -(g.dot(d) + 0.5 * d.dot(h * d));
      if (v > best.value) best = {v, d};
    }
  }
  return best;
}

// max over ||d|| <= delta of the order-j Taylor decrement, n = 2, polar grid.
inline double polar_measure(const Bundle& b, int j, double delta, int angles = 1440, int radii = 200) {
  double best = 0.0;
  for (int a = 0; a < angles; ++a) {
    const double t = 2.0 * M_PI * a / angles;
    const Vector u(Vector{{std::cos(t), std::sin(t)}});
    for (int r = 1; r <= radii; ++r) best = std::max(best, taylor_decrement(b, (delta * r / radii) * u, j));
  }
  return best;
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-4) {
  const Eigen::Index n = x.size();
  Matrix H(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      auto at = [&](double a, double b) {
        Vector y = x;
        y[i] += a;
        y[j] += b;
        return f(y);
      };
      H(i, j) = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
    }
  return H;
}

// Jacobian of a vector field by central differences, column i = d/dx_i.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-5) {
  const Eigen::Index n = x.size();
  Matrix J(f(x).size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

// min of s -> m(s) over a dense square grid on [lo, hi]^2.
inline GridMax grid_min_2d(const std::function<double(const Vector&)>& m, double lo, double hi, int per_side) {
  GridMax best{HUGE_VAL, Vector::Zero(2)};
  for (int a = 0; a <= per_side; ++a)
    for (int b = 0; b <= per_side; ++b) {
      const Vector s(Vector{{lo + (hi - lo) * a / per_side, lo + (hi - lo) * b / per_side}});
      const double v = m(s);
      if (v < best.value) best = {v, s};
    }
  return best;
}

// Second transcription of the theoretical constants.
struct Constants {
  double L_bar_f, sigma_max, kappa_s, kappa_delta_min, kappa_dm, kappa_step2, kappa_acc;
  double kappa_S, kappa_A, kappa_C, kappa_E, kappa_F, N1, N2;
  int k_acc_min;
  std::vector<double> pi;
};

struct Inputs {
  int p, q;
  std::vector<double> eps;
  double sigma0, sigma_min, eta1, eta2, gamma1, gamma2, gamma3, gamma_acc, omega, varsigma, theta, acc_max;
  double L_f, L_fp, f0_minus_flow;
};

inline Constants constants(const Inputs& in) {
  Constants c{};
  const int p = in.p, q = in.q;
  const double w = in.omega, vs = in.varsigma, th = in.theta;
  c.L_bar_f = in.L_f + in.acc_max;
  c.sigma_max = std::max(in.sigma0, 4.0 * in.gamma3 * in.L_fp / (1.0 - in.eta2));
  const double a = 2.0 * fact(p + 1) * c.L_bar_f / in.sigma_min;
  c.kappa_s = std::max(a, std::pow(a, 1.0 / p));
  auto kd = [&](double sigma) { return vs * th * (1 - w) / (8 * (1 + w) * (3 * c.L_bar_f + sigma)); };
  c.kappa_delta_min = kd(c.sigma_max);

  const double lipsig = in.L_fp + c.sigma_max;
  if (q == 1 || q == 2) {
    const double inner = vs * (1 - th) * (1 - w) / (2 * fact(q) * lipsig * (1 + w));
    c.kappa_dm = in.sigma_min / fact(p + 1) * std::pow(inner, double(p + 1) / double(p - q + 1));
  } else {
    const double inner = vs * (1 - th) * (1 - w) * std::pow(c.kappa_delta_min, q - 1) / (2 * fact(q) * lipsig * (1 + w));
    c.kappa_dm = in.sigma_min / fact(p + 1) * std::pow(inner, double(q * (p + 1)) / double(p));
  }

  double eps_min = in.eps[0], min_pow = HUGE_VAL;
  for (int j = 1; j <= q; ++j) {
    const double pj = q > 2 ? double(j * (p + 1)) / p : double(p + 1) / double(p - j + 1);
    c.pi.push_back(pj);
    min_pow = std::min(min_pow, std::pow(in.eps[j - 1], pj));
    eps_min = std::min(eps_min, in.eps[j - 1]);
  }

  c.kappa_step2 = vs * w * std::pow(c.kappa_delta_min, q) / (4 * fact(q) * (1 + w)) *
                  std::min(1.0 / std::max(1.0, std::pow(c.kappa_s, p)), th * (1 - w) / (3 * (1 + w)));
  c.kappa_acc = std::min(vs * w / (4 * fact(q)) * std::pow(c.kappa_delta_min, q - 1), c.kappa_step2);
  c.k_acc_min = in.acc_max > 0
                    ? std::max(0, int(std::floor(((q + 1) * std::log(eps_min) + std::log(c.kappa_acc / in.acc_max)) /
                                                 std::log(in.gamma_acc))))
                    : 0;

  const double ratio = 1.0 + std::fabs(std::log(in.gamma1)) / std::log(in.gamma2);
  const double front = fact(p + 1) / ((in.eta1 - 2 * w) * in.sigma_min);
  if (q <= 2) {
    c.kappa_S = front * (2 * fact(q) * (in.L_fp + in.acc_max + c.sigma_max) * (1 + w) / ((1 - th) * (1 - w)));
    c.kappa_A = 2 * c.kappa_S * ratio;
  } else {
    c.kappa_S = front * std::pow(2 * fact(q) * lipsig * (1 + w) /
                                     ((1 - th) * (1 - w) * std::pow(c.kappa_delta_min, q - 1)),
                                 double(p + 1) / p);
    c.kappa_A = c.kappa_S * ratio;
  }
  c.kappa_C = 2 * std::log(c.sigma_max / in.sigma0) / std::log(in.gamma2) + 2;
  c.kappa_E = (q + 1) / std::fabs(std::log(in.gamma_acc));
  c.kappa_F = (in.acc_max > 0 ? std::fabs(std::log(c.kappa_acc / in.acc_max)) / std::fabs(std::log(in.gamma_acc)) : 0.0) + 2;
  c.N1 = c.kappa_A * in.f0_minus_flow / min_pow + c.kappa_C;
  c.N2 = c.kappa_S * in.f0_minus_flow / min_pow + c.kappa_E * std::fabs(std::log(eps_min)) + c.kappa_F;
  return c;
}

}  // namespace oracle
