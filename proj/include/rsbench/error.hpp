#pragma once

#include <stdexcept>
#include <string>

namespace rsbench {

/// Malformed or inconsistent input data (bad records, unresolved references,
/// unreadable files). Maps to CLI exit status 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad invocation: missing flags, unknown subcommands. Maps to exit status 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contract violation on a library call (e.g. tile size of zero).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rsbench
