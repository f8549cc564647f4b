#include "arq/check.hpp"

#include <cmath>
#include <stdexcept>

#include "arq/taylor.hpp"

namespace arq {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::relative:
      return "relative";
    case Verdict::absolute:
      return "absolute";
    case Verdict::insufficient:
      return "insufficient";
  }
  return "?";
}

double accuracy_error_bound(double delta, std::span<const double> accuracies) {
  double sum = 0.0;
  for (std::size_t i = 0; i < accuracies.size(); ++i) {
    const int order = static_cast<int>(i) + 1;
    sum += accuracies[i] * std::pow(delta, order) / factorial(order);
  }
  return sum;
}

CheckOutcome check(double delta, double decrement, std::span<const double> accuracies, double xi,
                   double omega) {
  if (!(decrement >= 0.0)) throw std::invalid_argument("check: decrement must be >= 0");
  if (!(delta > 0.0)) throw std::invalid_argument("check: delta must be > 0");
  if (accuracies.empty()) throw std::invalid_argument("check: need at least one accuracy");
  for (double a : accuracies)
    if (!(a >= 0.0)) throw std::invalid_argument("check: accuracies must be >= 0");

  const int r = static_cast<int>(accuracies.size());
  const double error_bound = accuracy_error_bound(delta, accuracies);
  if (decrement > 0.0 && error_bound <= omega * decrement) return {Verdict::relative};
  if (error_bound <= omega * xi * std::pow(delta, r) / factorial(r)) return {Verdict::absolute};
  return {Verdict::insufficient};
}

}  // namespace arq
