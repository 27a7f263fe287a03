#ifndef NDPP_ERRORS_HPP
#define NDPP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ndpp {

/// Operand shapes are incompatible with the requested operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values or a numerically invalid input (e.g. a non-SPD matrix
/// where an SPD one is required by the math, not by the API).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ndpp

#endif  // NDPP_ERRORS_HPP
