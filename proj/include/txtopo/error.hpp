#pragma once

#include <stdexcept>
#include <string>

namespace txtopo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (CSV rows, timestamps, model files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input series do not cover what a computation needs (missing weeks, short history).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during training (non-finite loss and the like).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace txtopo
