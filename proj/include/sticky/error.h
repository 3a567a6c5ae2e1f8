#pragma once

#include <stdexcept>
#include <string>

namespace sticky {

// Base for everything the toolkit throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration, unknown flags, unreadable config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Backend unreachable or returned a malformed transport-level response.
// Retriable; never converted into a classification or a score.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Input data is malformed (bad pair file line, broken qrels, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Not enough data to run a stage (empty filtered pair set, < 4 candidates).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace sticky
