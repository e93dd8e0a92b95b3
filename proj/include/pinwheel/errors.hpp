#pragma once

#include <stdexcept>
#include <string>

namespace pinwheel {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The ray through the state does not cross the Nehari manifold.
class NehariInfeasible : public Error {
 public:
  using Error::Error;
};

/// Seed geometry cannot produce disjoint pinwheel supports.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class LinearSolveError : public Error {
 public:
  using Error::Error;
};

/// Resolution or memory budget exceeded.
class BudgetError : public Error {
 public:
  using Error::Error;
};

class ThresholdError : public Error {
 public:
  using Error::Error;
};

/// A partition label class is empty.
class DegeneratePartition : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pinwheel
