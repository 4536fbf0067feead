#pragma once

#include <stdexcept>
#include <string>

namespace wntk {

// Invalid arguments, shape mismatches, out-of-range configuration values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures that come from the numbers rather than the inputs' shape.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroNormInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularKernel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalDivergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MissingInitialOutputs : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed CSV or binary container. Carries the 1-based row/column when known.
class ParseError : public IoError {
 public:
  ParseError(const std::string& what, long row = -1, long column = -1)
      : IoError(what), row_(row), column_(column) {}
  long row() const noexcept { return row_; }
  long column() const noexcept { return column_; }

 private:
  long row_;
  long column_;
};

class EmptyDataset : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace wntk
