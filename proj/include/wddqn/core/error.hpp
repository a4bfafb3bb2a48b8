#pragma once

#include <stdexcept>
#include <string>

namespace wddqn {

/// Base for recoverable runtime failures (bad input files, I/O, invalid configs).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition, e.g. stepping a finished episode.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace wddqn
