#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nscov {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: missing columns, non-positive log columns, duplicates (exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure in evaluation or factorization (exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization met a non-positive pivot.
class IndefiniteError : public NumericalError {
 public:
  IndefiniteError(std::ptrdiff_t pivot, const std::string& what)
      : NumericalError(what + " (failing pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

  [[nodiscard]] std::ptrdiff_t pivot() const noexcept { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

}  // namespace nscov
