#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace arq {

/// Dense symmetric tensor of arbitrary order over R^n.
///
/// Entries are stored in full (no symmetric packing) as a flat row-major array
/// of size n^order, last index fastest. Order 1 is a vector, order 2 a matrix.
/// Symmetry is maintained by construction through set_symmetric(); the raw
/// data accessors do not enforce it.
template <typename Scalar>
class SymmetricTensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMajorMap =
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  SymmetricTensor() = default;

  SymmetricTensor(int order, int dim) : order_(order), dim_(dim) {
    if (order < 0 || dim < 1) throw std::invalid_argument("SymmetricTensor: bad order/dim");
    data_ = Vector::Zero(flat_size(order, dim));
  }

  static SymmetricTensor from_vector(const Vector& v) {
    SymmetricTensor t(1, static_cast<int>(v.size()));
    t.data_ = v;
    return t;
  }

  /// The matrix is symmetrized as (M + M^T)/2.
  static SymmetricTensor from_matrix(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("from_matrix: not square");
    const int n = static_cast<int>(m.rows());
    SymmetricTensor t(2, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const Scalar v = i == j ? m(i, i) : (m(i, j) + m(j, i)) / Scalar(2);
        t.data_[i * n + j] = v;
        t.data_[j * n + i] = v;
      }
    return t;
  }

  /// Symmetric outer power u (x) u (x) ... (x) u, `order` copies.
  static SymmetricTensor outer_power(const Vector& u, int order) {
    SymmetricTensor t(order, static_cast<int>(u.size()));
    t.for_each_sorted_index([&](const std::vector<int>& idx) {
      Scalar v(1);
      for (int i : idx) v *= u[i];
      t.set_symmetric(idx, v);
    });
    return t;
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  Scalar operator()(const std::vector<int>& idx) const { return data_[offset(idx)]; }

  /// Writes `value` to every permutation of `idx`.
  void set_symmetric(std::vector<int> idx, Scalar value) {
    std::sort(idx.begin(), idx.end());
    do {
      data_[offset(idx)] = value;
    } while (std::next_permutation(idx.begin(), idx.end()));
  }

  /// Calls f(idx) once per non-decreasing multi-index.
  template <typename F>
  void for_each_sorted_index(F&& f) const {
    if (order_ == 0) {
      f(std::vector<int>{});
      return;
    }
    std::vector<int> idx(order_, 0);
    while (true) {
      f(idx);
      int pos = order_ - 1;
      while (pos >= 0 && idx[pos] == dim_ - 1) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int k = pos + 1; k < order_; ++k) idx[k] = idx[pos];
    }
  }

  Vector as_vector() const {
    if (order_ != 1) throw std::logic_error("as_vector: order != 1");
    return data_;
  }

  Matrix as_matrix() const {
    if (order_ != 2) throw std::logic_error("as_matrix: order != 2");
    return RowMajorMap(data_.data(), dim_, dim_);
  }

  /// T[s]: contracts the last index with s, returning a tensor of order - 1.
  SymmetricTensor contract(const Vector& s) const {
    check_dim(s);
    if (order_ == 0) throw std::logic_error("contract: order 0");
    SymmetricTensor r;
    r.order_ = order_ - 1;
    r.dim_ = dim_;
    r.data_ = RowMajorMap(data_.data(), data_.size() / dim_, dim_) * s;
    return r;
  }

  /// T[s]^m, contracting m indices.
  SymmetricTensor contract(const Vector& s, int m) const {
    SymmetricTensor r = *this;
    for (int i = 0; i < m; ++i) r = r.contract(s);
    return r;
  }

  /// Full contraction T[s]^order.
  Scalar apply(const Vector& s) const {
    if (order_ == 0) return data_[0];
    return contract(s, order_).data_[0];
  }

  Scalar frobenius_norm() const { return data_.norm(); }

  SymmetricTensor& operator+=(const SymmetricTensor& o) {
    check_same(o);
    data_ += o.data_;
    return *this;
  }
  SymmetricTensor& operator-=(const SymmetricTensor& o) {
    check_same(o);
    data_ -= o.data_;
    return *this;
  }
  SymmetricTensor& operator*=(Scalar a) {
    data_ *= a;
    return *this;
  }
  friend SymmetricTensor operator+(SymmetricTensor a, const SymmetricTensor& b) { return a += b; }
  friend SymmetricTensor operator-(SymmetricTensor a, const SymmetricTensor& b) { return a -= b; }
  friend SymmetricTensor operator*(SymmetricTensor a, Scalar s) { return a *= s; }
  friend SymmetricTensor operator*(Scalar s, SymmetricTensor a) { return a *= s; }

 private:
  static Eigen::Index flat_size(int order, int dim) {
    Eigen::Index n = 1;
    for (int i = 0; i < order; ++i) n *= dim;
    return n;
  }

  Eigen::Index offset(const std::vector<int>& idx) const {
    Eigen::Index off = 0;
    for (int i : idx) off = off * dim_ + i;
    return off;
  }

  void check_dim(const Vector& s) const {
    if (s.size() != dim_) throw std::invalid_argument("tensor contraction: dimension mismatch");
  }
  void check_same(const SymmetricTensor& o) const {
    if (o.order_ != order_ || o.dim_ != dim_)
      throw std::invalid_argument("tensor arithmetic: shape mismatch");
  }

  int order_ = 0;
  int dim_ = 1;
  Vector data_ = Vector::Zero(1);
};

using Tensor = SymmetricTensor<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest |T[u]^k| over sampled unit vectors (random + coordinate axes),
/// refined by a few symmetric power iterations. A lower bound on the
/// induced norm; used in diagnostics only.
template <typename Scalar>
Scalar estimated_operator_norm(const SymmetricTensor<Scalar>& t, int samples = 1000,
                               std::uint64_t seed = 0x5eed) {
  using Vec = typename SymmetricTensor<Scalar>::Vector;
  const int n = t.dim();
  Scalar best(0);
  Vec best_u = Vec::Unit(n, 0);
  auto consider = [&](const Vec& u) {
    const Scalar v = std::abs(t.apply(u));
    if (v > best) {
      best = v;
      best_u = u;
    }
  };
  for (int i = 0; i < n; ++i) consider(Vec::Unit(n, i));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < samples; ++k) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = Scalar(normal(rng));
    const Scalar nu = u.norm();
    if (nu > Scalar(0)) consider(u / nu);
  }
  // shifted symmetric power iteration from the best sample
  Vec u = best_u;
  for (int it = 0; it < 50; ++it) {
    const Scalar sign = t.apply(u) >= Scalar(0) ? Scalar(1) : Scalar(-1);
    Vec w = sign * t.contract(u, t.order() - 1).data() + best * u;
    const Scalar nw = w.norm();
    if (!(nw > Scalar(0))) break;
    u = w / nw;
    consider(u);
  }
  return best;
}

/// Induced Euclidean norm: exact for orders 1 and 2, sampled estimate above.
template <typename Scalar>
Scalar operator_norm(const SymmetricTensor<Scalar>& t) {
  switch (t.order()) {
    case 0:
      return std::abs(t.data()[0]);
    case 1:
      return t.data().norm();
    case 2: {
      Eigen::SelfAdjointEigenSolver<typename SymmetricTensor<Scalar>::Matrix> es(
          t.as_matrix(), Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    default:
      return estimated_operator_norm(t);
  }
}

/// An upper bound on the induced norm: exact for orders <= 2, Frobenius above.
template <typename Scalar>
Scalar operator_norm_upper(const SymmetricTensor<Scalar>& t) {
  return t.order() <= 2 ? operator_norm(t) : t.frobenius_norm();
}

/// Largest |T(idx) - T(perm(idx))| over all index permutations.
template <typename Scalar>
Scalar symmetry_defect(const SymmetricTensor<Scalar>& t) {
  Scalar worst(0);
  t.for_each_sorted_index([&](std::vector<int> idx) {
    const Scalar ref = t(idx);
    do {
      worst = std::max(worst, std::abs(t(idx) - ref));
    } while (std::next_permutation(idx.begin(), idx.end()));
  });
  return worst;
}

}  // namespace arq
