#pragma once

#include <stdexcept>
#include <string>

namespace covsched {

// Status codes shared by the C API and the CLI exit codes.
enum class Status : int {
  Ok = 0,
  ConfigError = 1,    // bad usage, schema violation, size guard exceeded
  Precondition = 2,   // mathematical precondition failed (stability, detectability)
  Violation = 3,      // a verified invariant was found violated
  Internal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& msg)
      : std::runtime_error(msg), status_(status) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

// Schema/usage problems: dimension mismatches, invalid fields, guard limits.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(Status::ConfigError, msg) {}
};

// A solver precondition does not hold (e.g. reception probability below the
// stability bound, spectral radius >= 1, non-detectable pair).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& msg)
      : Error(Status::Precondition, msg) {}
};

}  // namespace covsched
