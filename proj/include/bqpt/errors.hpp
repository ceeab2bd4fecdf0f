#pragma once

#include <stdexcept>

namespace bqpt {

// Argument or configuration outside the domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not produce a trustworthy result
// (non-convergence, degenerate data, ill-posed fit).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bqpt
