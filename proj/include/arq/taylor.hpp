#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "arq/tensor.hpp"

namespace arq {

inline double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

/// Function value and derivative tensors of orders 1..p at a point, each
/// tagged with the absolute accuracy it was computed to (0 = exact).
template <typename Scalar>
struct DerivativeBundle {
  using Vector = typename SymmetricTensor<Scalar>::Vector;

  Scalar value{0};
  std::vector<SymmetricTensor<Scalar>> tensors;  // tensors[i-1] has order i
  std::vector<double> accuracy;

  int degree() const { return static_cast<int>(tensors.size()); }
  int dim() const { return tensors.empty() ? 0 : tensors.front().dim(); }

  const SymmetricTensor<Scalar>& derivative(int i) const { return tensors.at(i - 1); }
  SymmetricTensor<Scalar>& derivative(int i) { return tensors.at(i - 1); }

  /// Throws if shapes or accuracy tags are inconsistent.
  void validate() const {
    if (tensors.empty()) throw std::invalid_argument("bundle: degree must be >= 1");
    for (int i = 1; i <= degree(); ++i) {
      if (derivative(i).order() != i || derivative(i).dim() != dim())
        throw std::invalid_argument("bundle: tensor shape mismatch");
    }
    if (static_cast<int>(accuracy.size()) != degree())
      throw std::invalid_argument("bundle: accuracy list length must equal degree");
    for (double a : accuracy)
      if (!(a >= 0.0)) throw std::invalid_argument("bundle: negative accuracy");
  }
};

using Bundle = DerivativeBundle<double>;

/// m(s) = T_p(x, s) + sigma/(p+1)! ||s||^{p+1}.
template <typename Scalar>
struct RegularizedModel {
  DerivativeBundle<Scalar> bundle;
  Scalar sigma{1};

  int degree() const { return bundle.degree(); }
};

using Model = RegularizedModel<double>;

namespace detail {

template <typename Scalar>
void check_taylor_args(const DerivativeBundle<Scalar>& b,
                       const typename SymmetricTensor<Scalar>::Vector& s, int j) {
  if (s.size() != b.dim()) throw std::invalid_argument("taylor: dimension mismatch");
  if (j < 1 || j > b.degree()) throw std::invalid_argument("taylor: order out of range");
}

// sum_{i=1..j} T_i[s]^i / i!
template <typename Scalar>
Scalar taylor_increment(const DerivativeBundle<Scalar>& b,
                        const typename SymmetricTensor<Scalar>::Vector& s, int j) {
  Scalar total(0);
  for (int i = 1; i <= j; ++i) total += b.derivative(i).apply(s) / Scalar(factorial(i));
  return total;
}

}  // namespace detail

template <typename Scalar>
Scalar taylor_eval(const DerivativeBundle<Scalar>& b,
                   const typename SymmetricTensor<Scalar>::Vector& s, int j) {
  detail::check_taylor_args(b, s, j);
  return b.value + detail::taylor_increment(b, s, j);
}

/// T_j(x,0) - T_j(x,s); independent of the stored value.
template <typename Scalar>
Scalar taylor_decrement(const DerivativeBundle<Scalar>& b,
                        const typename SymmetricTensor<Scalar>::Vector& s, int j) {
  detail::check_taylor_args(b, s, j);
  return -detail::taylor_increment(b, s, j);
}

template <typename Scalar>
Scalar model_decrement(const RegularizedModel<Scalar>& m,
                       const typename SymmetricTensor<Scalar>::Vector& s) {
  const int p = m.degree();
  const Scalar r = s.norm();
  return taylor_decrement(m.bundle, s, p) - m.sigma / Scalar(factorial(p + 1)) * std::pow(r, p + 1);
}

template <typename Scalar>
Scalar model_value(const RegularizedModel<Scalar>& m,
                   const typename SymmetricTensor<Scalar>::Vector& s) {
  return m.bundle.value - model_decrement(m, s);
}

/// j-th derivative of s -> ||s||^power at s, in closed form for j <= 3.
/// At s = 0 the derivative is returned when it exists (it is zero unless
/// power == j == 2); an undefined derivative throws.
template <typename Scalar>
SymmetricTensor<Scalar> regularizer_derivative(const typename SymmetricTensor<Scalar>::Vector& s,
                                               int power, int j) {
  const int n = static_cast<int>(s.size());
  const Scalar m = Scalar(power);
  const Scalar r = s.norm();
  SymmetricTensor<Scalar> out(j, n);
  if (j < 1 || j > 3) throw std::invalid_argument("regularizer_derivative: order must be 1..3");
  if (power < 2) throw std::invalid_argument("regularizer_derivative: power must be >= 2");
  if (r == Scalar(0)) {
    if (j < power) return out;
    if (j == 2 && power == 2) {
      for (int i = 0; i < n; ++i) out.set_symmetric({i, i}, Scalar(2));
      return out;
    }
    if (j == 3 && power == 2) return out;
    throw std::domain_error("regularizer_derivative: undefined at s = 0");
  }
  // coefficient * r^e, with a zero coefficient absorbing any singular power
  auto term = [&](Scalar coeff, int e) { return coeff == Scalar(0) ? Scalar(0) : coeff * std::pow(r, e); };
  if (j == 1) {
    out.data() = term(m, power - 2) * s;
    return out;
  }
  if (j == 2) {
    const Scalar a = term(m, power - 2);
    const Scalar b = term(m * (m - 2), power - 4);
    for (int i = 0; i < n; ++i)
      for (int k = i; k < n; ++k) out.set_symmetric({i, k}, (i == k ? a : Scalar(0)) + b * s[i] * s[k]);
    return out;
  }
  const Scalar a = term(m * (m - 2), power - 4);
  const Scalar b = term(m * (m - 2) * (m - 4), power - 6);
  out.for_each_sorted_index([&](const std::vector<int>& idx) {
    const int i = idx[0], k = idx[1], l = idx[2];
    const Scalar sym = (k == l ? s[i] : Scalar(0)) + (i == l ? s[k] : Scalar(0)) + (i == k ? s[l] : Scalar(0));
    out.set_symmetric(idx, a * sym + b * s[i] * s[k] * s[l]);
  });
  return out;
}

/// j-th derivative of the model at s, for any j <= 3 (no j <= p restriction).
template <typename Scalar>
SymmetricTensor<Scalar> model_derivative(const RegularizedModel<Scalar>& m,
                                         const typename SymmetricTensor<Scalar>::Vector& s, int j) {
  const int p = m.degree();
  if (s.size() != m.bundle.dim()) throw std::invalid_argument("model_derivative: dimension mismatch");
  SymmetricTensor<Scalar> out(j, static_cast<int>(s.size()));
  for (int l = j; l <= p; ++l)
    out += m.bundle.derivative(l).contract(s, l - j) * Scalar(1.0 / factorial(l - j));
  out += regularizer_derivative<Scalar>(s, p + 1, j) * Scalar(m.sigma / factorial(p + 1));
  return out;
}

/// Derivatives of the model's own Taylor expansion about s, orders 1..p.
template <typename Scalar>
SymmetricTensor<Scalar> shifted_model_derivatives(const RegularizedModel<Scalar>& m,
                                                  const typename SymmetricTensor<Scalar>::Vector& s,
                                                  int j) {
  if (j < 1 || j > m.degree())
    throw std::invalid_argument("shifted_model_derivatives: order must be in 1..p");
  return model_derivative(m, s, j);
}

/// Bundle holding the model's derivatives of orders 1..order at s.
template <typename Scalar>
DerivativeBundle<Scalar> shifted_model_bundle(const RegularizedModel<Scalar>& m,
                                              const typename SymmetricTensor<Scalar>::Vector& s,
                                              int order) {
  DerivativeBundle<Scalar> b;
  b.value = model_value(m, s);
  for (int j = 1; j <= order; ++j) b.tensors.push_back(shifted_model_derivatives(m, s, j));
  b.accuracy.assign(order, 0.0);
  return b;
}

}  // namespace arq
