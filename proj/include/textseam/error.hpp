#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace textseam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented invariant or range. The CLI maps these to exit 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed row in a corpus or index file. `row()` is 1-based over data rows.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : ValidationError("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class NotFoundError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Bad hyperparameter or incompatible pipeline.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Estimator or optimizer could not produce a finite answer.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace textseam
