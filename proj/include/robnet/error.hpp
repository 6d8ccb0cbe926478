#pragma once

#include <stdexcept>
#include <string>

namespace robnet {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON syntax, wrong field types).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Expansion decision that violates an exclusion group.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

// Scenario that is not balanced on some connected component.
class ImbalanceError : public Error {
 public:
  ImbalanceError(const std::string& what, std::size_t component, double residual)
      : Error(what), component_(component), residual_(residual) {}
  std::size_t component() const { return component_; }
  double residual() const { return residual_; }

 private:
  std::size_t component_;
  double residual_;
};

// Iterative method that failed to converge.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A configured work budget (vertex cap, node limit, ...) was exhausted.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch or otherwise malformed optimization problem.
class StructuralError : public Error {
 public:
  using Error::Error;
};

}  // namespace robnet
