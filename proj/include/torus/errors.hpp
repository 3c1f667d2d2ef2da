#pragma once

#include <stdexcept>
#include <string>

namespace torus {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (matrix strings, config files). Maps to a usage error in the CLI.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Well-formed input that the mathematics rejects or that exceeds a resource cap.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public DomainError {
 public:
  SingularMatrix() : DomainError("singular matrix") {}
};

class CapExceeded : public DomainError {
 public:
  using DomainError::DomainError;
};

class DimensionError : public DomainError {
 public:
  using DomainError::DomainError;
};

class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Numerical non-convergence; carries the best value reached before giving up.
class ConvergenceError : public DomainError {
 public:
  ConvergenceError(const std::string& what, double partial, double error)
      : DomainError(what), partial_(partial), error_(error) {}
  double partial() const noexcept { return partial_; }
  double error_estimate() const noexcept { return error_; }

 private:
  double partial_;
  double error_;
};

}  // namespace torus
