#pragma once

#include <stdexcept>
#include <string>

namespace aoc {

/// Input violates a documented precondition (bad index, coincident eigenvalues, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters lie outside the regime the model is defined for
/// (e.g. attractive coupling too weak to bind in a box of this size).
class RegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed: bracket lost, no convergence, singular matrix.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A proven structural property (interlacing, p != q, ...) was observed violated.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace aoc
