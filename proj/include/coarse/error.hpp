#pragma once

#include <stdexcept>
#include <string>

namespace coarse {

// All library failures derive from Error so callers (the CLI in particular)
// can map them to a single exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class ConnectivityError : public Error {
 public:
  ConnectivityError(const std::string& what, std::string component)
      : Error(what), component_(std::move(component)) {}
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string witness)
      : Error(what + " (witness: " + witness + ")"),
        witness_(std::move(witness)) {}
  const std::string& witness() const noexcept { return witness_; }

 private:
  std::string witness_;
};

// Raised when a documented invariant of a construction fails; indicates a bug
// or an input that slipped past validation.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class DependencyError : public Error {
 public:
  using Error::Error;
};

// The flaring gate has not been passed for a construction that requires it.
class GateError : public Error {
 public:
  using Error::Error;
};

}  // namespace coarse
