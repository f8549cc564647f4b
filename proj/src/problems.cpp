#include <cmath>
#include <random>
#include <stdexcept>

#include "arq/oracle.hpp"

namespace arq {

Bundle Problem::exact_bundle(const Vector& x, int p) const {
  if (p < 1 || p > max_order) throw std::invalid_argument("exact_bundle: order out of range");
  Bundle b;
  b.value = value(x);
  for (int i = 1; i <= p; ++i) b.tensors.push_back(derivative(x, i));
  b.accuracy.assign(p, 0.0);
  return b;
}

namespace {

void require_order(int i, const char* who) {
  if (i < 1 || i > 3) throw std::invalid_argument(std::string(who) + ": derivative order must be 1..3");
}

// Tensor with only diagonal entries d_i at index (i,...,i).
Tensor diagonal_tensor(int order, const Vector& d) {
  Tensor t(order, static_cast<int>(d.size()));
  for (int i = 0; i < d.size(); ++i) t.set_symmetric(std::vector<int>(order, i), d[i]);
  return t;
}

}  // namespace

Problem make_quadratic(const Matrix& a, std::string name) {
  if (a.rows() != a.cols()) throw std::invalid_argument("make_quadratic: matrix not square");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 0.0) throw std::invalid_argument("make_quadratic: matrix not PSD");
  Problem p;
  p.name = std::move(name);
  p.dim = static_cast<int>(a.rows());
  p.value = [sym](const Vector& x) { return 0.5 * x.dot(sym * x); };
  p.derivative = [sym](const Vector& x, int i) {
    require_order(i, "quadratic");
    if (i == 1) return Tensor::from_vector(sym * x);
    if (i == 2) return Tensor::from_matrix(sym);
    return Tensor(3, static_cast<int>(x.size()));
  };
  p.f_low = 0.0;
  p.x0 = Vector::Ones(p.dim);
  return p;
}

Problem make_spread_quadratic(int n) {
  if (n < 1) throw std::invalid_argument("quadratic: n must be >= 1");
  std::mt19937_64 rng(20211);
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector spectrum(n);
  for (int i = 0; i < n; ++i) spectrum[i] = n == 1 ? 1.0 : 1.0 + 9.0 * i / (n - 1);
  Problem p = make_quadratic(q * spectrum.asDiagonal() * q.transpose(), "quadratic");
  p.x0 = Vector::Ones(n);
  return p;
}

Problem make_rosenbrock(int n) {
  if (n < 2) throw std::invalid_argument("rosenbrock: n must be >= 2");
  Problem p;
  p.name = "rosenbrock";
  p.dim = n;
  p.value = [](const Vector& x) {
    double f = 0.0;
    for (int i = 0; i + 1 < x.size(); ++i) {
      const double u = x[i + 1] - x[i] * x[i];
      f += 100.0 * u * u + (1.0 - x[i]) * (1.0 - x[i]);
    }
    return f;
  };
  p.derivative = [](const Vector& x, int order) {
    require_order(order, "rosenbrock");
    const int n = static_cast<int>(x.size());
    Tensor t(order, n);
    auto add = [&](std::vector<int> idx, double v) { t.set_symmetric(idx, t(idx) + v); };
    for (int i = 0; i + 1 < n; ++i) {
      const double a = x[i], b = x[i + 1];
      const int ia = i, ib = i + 1;
      if (order == 1) {
        add({ia}, -400.0 * a * (b - a * a) - 2.0 * (1.0 - a));
        add({ib}, 200.0 * (b - a * a));
      } else if (order == 2) {
        add({ia, ia}, -400.0 * b + 1200.0 * a * a + 2.0);
        add({ia, ib}, -400.0 * a);
        add({ib, ib}, 200.0);
      } else {
        add({ia, ia, ia}, 2400.0 * a);
        add({ia, ia, ib}, -400.0);
      }
    }
    return t;
  };
  p.f_low = 0.0;
  p.x0 = Vector(n);
  for (int i = 0; i < n; ++i) p.x0[i] = i % 2 == 0 ? -1.2 : 1.0;
  return p;
}

Problem make_double_well(int n) {
  if (n < 1) throw std::invalid_argument("quartic: n must be >= 1");
  Problem p;
  p.name = "quartic";
  p.dim = n;
  p.value = [](const Vector& x) {
    return (x.array().square() - 1.0).square().sum();
  };
  p.derivative = [](const Vector& x, int order) {
    require_order(order, "quartic");
    const Eigen::ArrayXd a = x.array();
    if (order == 1) return Tensor::from_vector((4.0 * a * (a.square() - 1.0)).matrix());
    if (order == 2) return diagonal_tensor(2, (12.0 * a.square() - 4.0).matrix());
    return diagonal_tensor(3, (24.0 * a).matrix());
  };
  p.f_low = 0.0;
  p.x0 = Vector(n);
  for (int i = 0; i < n; ++i) p.x0[i] = (i % 2 == 0 ? 0.1 : -0.2) + 0.05 * i;
  return p;
}

Problem make_sine(int n) {
  if (n < 1) throw std::invalid_argument("sine: n must be >= 1");
  Problem p;
  p.name = "sine";
  p.dim = n;
  p.value = [](const Vector& x) { return x.array().sin().sum() + 0.5 * x.squaredNorm(); };
  p.derivative = [](const Vector& x, int order) {
    require_order(order, "sine");
    const Eigen::ArrayXd a = x.array();
    if (order == 1) return Tensor::from_vector((a.cos() + a).matrix());
    if (order == 2) return diagonal_tensor(2, (1.0 - a.sin()).matrix());
    return diagonal_tensor(3, (-a.cos()).matrix());
  };
  p.f_low = -static_cast<double>(n);
  p.x0 = Vector::Constant(n, 3.0);
  return p;
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names{"quadratic", "rosenbrock", "quartic", "sine"};
  return names;
}

Problem make_problem(const std::string& name, int n) {
  if (name == "quadratic") return make_spread_quadratic(n);
  if (name == "rosenbrock") return make_rosenbrock(n);
  if (name == "quartic") return make_double_well(n);
  if (name == "sine") return make_sine(n);
  throw std::invalid_argument("unknown problem '" + name + "'");
}

}  // namespace arq
