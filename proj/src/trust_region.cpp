#include "arq/trust_region.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace arq {

bool lexicographically_greater(const Vector& a, const Vector& b, double tol) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > b[i] + tol) return true;
    if (a[i] < b[i] - tol) return false;
  }
  return false;
}

namespace {

double quadratic_value(const Vector& g, const Matrix& h, const Vector& d) {
  return g.dot(d) + 0.5 * d.dot(h * d);
}

}  // namespace

TrustRegionSolution solve_trust_region(const Vector& g, const Matrix& h, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("solve_trust_region: radius must be > 0");
  if (h.rows() != g.size() || h.cols() != g.size())
    throw std::invalid_argument("solve_trust_region: dimension mismatch");
  const Eigen::Index n = g.size();

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()));
  const Vector& lambda = es.eigenvalues();  // ascending
  const Matrix& q = es.eigenvectors();
  const Vector gh = q.transpose() * g;
  const double lmin = lambda[0];
  const double scale = std::max({lambda.cwiseAbs().maxCoeff(), g.norm() / radius, 1e-300});
  const double eig_tol = 1e-12 * scale;

  std::vector<TrustRegionSolution> candidates;
  auto add = [&](Vector d, double mu, bool hard) {
    const double nd = d.norm();
    if (nd > radius) d *= radius / nd;
    candidates.push_back({d, quadratic_value(g, h, d), mu, hard});
  };

  auto step_at = [&](double mu) {
    Vector c = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (gh[i] != 0.0) c[i] = -gh[i] / (lambda[i] + mu);
    return Vector(q * c);
  };
  auto norm2_at = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (gh[i] == 0.0) continue;
      const double den = lambda[i] + mu;
      if (std::abs(den) <= eig_tol) return std::numeric_limits<double>::infinity();
      s += (gh[i] / den) * (gh[i] / den);
    }
    return s;
  };

  bool interior = false;
  if (lmin > eig_tol) {
    const Vector d = step_at(0.0);
    if (d.norm() <= radius) {
      add(d, 0.0, false);
      interior = true;
    }
  }

  if (!interior) {
    // ||d(mu)|| decreases on (max(0,-lmin), inf); look for ||d(mu)|| = radius
    const double lo0 = std::max(0.0, -lmin);
    const double gnorm = g.norm();
    if (gnorm > 0.0 && norm2_at(lo0) > radius * radius) {
      double lo = lo0, hi = lo0 + gnorm / radius + std::abs(lmin) + eig_tol;
      double mu = hi;
      for (int it = 0; it < 300; ++it) {
        const double n2 = norm2_at(mu);
        const double nd = std::sqrt(n2);
        if (nd > radius)
          lo = mu;
        else
          hi = mu;
        if (std::abs(nd - radius) <= 1e-14 * radius || hi - lo <= 1e-16 * std::max(1.0, hi)) break;
        double d3 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) d3 += gh[i] * gh[i] / std::pow(lambda[i] + mu, 3);
        // Newton on 1/||d|| - 1/radius, which is nearly linear in mu
        double next = mu - (1.0 / nd - 1.0 / radius) * (n2 * nd) / d3;
        if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
        mu = next;
      }
      add(step_at(mu), mu, false);
    }

    // hard case: mu = -lmin, step completed along the leftmost eigenvector
    if (lmin <= eig_tol) {
      const double mu = std::max(0.0, -lmin);
      Vector c = Vector::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i)
        if (lambda[i] - lmin > eig_tol) c[i] = -gh[i] / (lambda[i] + mu);
      const Vector d0 = q * c;
      const double r0 = d0.norm();
      if (r0 <= radius) {
        const double tau = std::sqrt(std::max(0.0, radius * radius - r0 * r0));
        const Vector v = q.col(0);
        add(d0 + tau * v, mu, true);
        add(d0 - tau * v, mu, true);
      }
    }
  }

  if (candidates.empty()) add(Vector::Zero(n), 0.0, false);

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double vi = candidates[i].value, vb = candidates[best].value;
    const double tie = 1e-12 * std::max({1.0, std::abs(vi), std::abs(vb)});
    if (vi < vb - tie || (std::abs(vi - vb) <= tie &&
                          lexicographically_greater(candidates[i].step, candidates[best].step)))
      best = i;
  }
  return candidates[best];
}

}  // namespace arq
