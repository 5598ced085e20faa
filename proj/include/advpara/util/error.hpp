#pragma once

#include <stdexcept>
#include <string>

namespace advpara {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: flags, config files, hyperparameters out of range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent data on disk or in memory.
class DataError : public Error {
 public:
  using Error::Error;
};

// A type invariant was violated by a caller (e.g. token id out of range).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace advpara
