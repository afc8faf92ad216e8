#pragma once

#include <stdexcept>
#include <string>

namespace hym {

/// Base class for every precondition / contract violation raised by the library.
class ContractError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Operands live on different grids, or have mismatched rank.
class ShapeError : public ContractError {
public:
  using ContractError::ContractError;
};

class IndexError : public ContractError {
public:
  using ContractError::ContractError;
};

/// A matrix field expected to be positive definite is not. Carries the worst
/// grid point and its smallest eigenvalue.
class PositivityError : public ContractError {
public:
  PositivityError(const std::string &what, std::size_t point, double lambda_min)
      : ContractError(what), point_(point), lambda_min_(lambda_min) {}
  std::size_t point() const noexcept { return point_; }
  double lambda_min() const noexcept { return lambda_min_; }

private:
  std::size_t point_;
  double lambda_min_;
};

/// Right-hand side of a Poisson problem is not mean-zero.
class SolvabilityError : public ContractError {
public:
  SolvabilityError(const std::string &what, double integral)
      : ContractError(what), integral_(integral) {}
  double integral() const noexcept { return integral_; }

private:
  double integral_;
};

/// An integral hypothesis fails (no solution can exist / normalization impossible).
class ObstructionError : public std::runtime_error {
public:
  ObstructionError(const std::string &what, double integral)
      : std::runtime_error(what), integral_(integral) {}
  double integral() const noexcept { return integral_; }

private:
  double integral_;
};

/// Bisection could not bracket the requested value.
class BracketError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace hym
