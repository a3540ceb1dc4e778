#pragma once

#include <stdexcept>
#include <string>

namespace tgqa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTableError : public Error {
 public:
  using Error::Error;
};

class InvalidSelectionError : public Error {
 public:
  using Error::Error;
};

class InvalidExampleError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or produced non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or corrupted checkpoint / data file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace tgqa
