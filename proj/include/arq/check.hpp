#pragma once

#include <span>
#include <string>

namespace arq {

enum class Verdict { relative, absolute, insufficient };

std::string to_string(Verdict v);

struct CheckOutcome {
  Verdict verdict = Verdict::insufficient;

  bool sufficient() const { return verdict != Verdict::insufficient; }
};

/// Decides whether the absolute derivative accuracies `accuracies`
/// (orders 1..r) make a computed Taylor decrement over a ball of radius
/// `delta` relatively accurate (error <= omega * decrement), absolutely small
/// (bounded by xi delta^r / r!), or neither. The relative test is tried first;
/// ties count as satisfied.
///
/// Throws std::invalid_argument for a negative decrement, non-positive delta
/// or negative accuracies.
CheckOutcome check(double delta, double decrement, std::span<const double> accuracies, double xi,
                   double omega);

/// sum_i accuracies[i-1] delta^i / i!
double accuracy_error_bound(double delta, std::span<const double> accuracies);

}  // namespace arq
