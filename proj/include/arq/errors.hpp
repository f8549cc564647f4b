#pragma once

#include <stdexcept>
#include <string>

namespace arq {

/// A solver configuration violates one of the algorithm's parameter constraints.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An inner subproblem solve failed to meet its postcondition within its budget.
class SolverStall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A condition the analysis proves unreachable was reached; indicates a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace arq
