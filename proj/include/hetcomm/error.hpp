#pragma once

#include <stdexcept>
#include <string>

namespace hetcomm {

/// Base for all library errors that callers are expected to report.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad machine description, unknown preset, malformed option.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad or insufficient measurement data; fits that cannot be carried out.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetcomm
