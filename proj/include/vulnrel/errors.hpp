#pragma once

#include <stdexcept>
#include <string>

namespace vulnrel {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that cannot be interpreted (exit code 2 territory).
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem / network trouble (exit code 3 territory).
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class SpecSyntaxError : public DataError {
 public:
  SpecSyntaxError(const std::string& token, const std::string& why)
      : DataError("invalid spec token '" + token + "': " + why), token_(token) {}

  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

class LoadError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class VersionMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Transport failure that survived the retry budget.
class RetryableError : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

class IoError : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

/// A spec clause references a version that is not in the release history.
class ClauseInvalidError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

class SeparationError : public DataError {
 public:
  using DataError::DataError;
};

class SingularityError : public DataError {
 public:
  using DataError::DataError;
};

class ConvergenceError : public DataError {
 public:
  using DataError::DataError;
};

class SelectionError : public DataError {
 public:
  using DataError::DataError;
};

class ForecastError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace vulnrel
