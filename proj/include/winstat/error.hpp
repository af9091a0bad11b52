#pragma once

#include <stdexcept>
#include <string>

namespace winstat {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed configuration, CSV, or JSON input.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Data or arguments violate a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Mathematical domain violation (theta outside (0,1), T <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace winstat
