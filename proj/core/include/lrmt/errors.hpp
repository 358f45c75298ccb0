#pragma once

#include <stdexcept>
#include <string>

namespace lrmt {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message names the file and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A factorization or inner solve could not be carried out.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrmt
