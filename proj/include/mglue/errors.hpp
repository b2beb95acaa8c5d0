#pragma once

#include <stdexcept>
#include <string>

namespace mglue {

/// Invalid model or run parameters (bad exponents, empty sequences, regime mismatch).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a closed-form expression.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative numerics that failed to bracket or converge, or a draw budget ran out.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A generation of the leaf-measure construction has no members.
class EmptyGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mglue
