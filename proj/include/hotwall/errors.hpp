#pragma once

#include <stdexcept>
#include <string>

namespace hotwall {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// laws
class InconclusiveConvergence : public Error {
 public:
  using Error::Error;
};
class InfiniteMean : public Error {
 public:
  using Error::Error;
};
class ZeroMean : public Error {
 public:
  using Error::Error;
};
class DivergentNormalizer : public Error {
 public:
  using Error::Error;
};

// process
class HorizonExceeded : public Error {
 public:
  using Error::Error;
};
class BeforeFirstRenewal : public Error {
 public:
  using Error::Error;
};
class BoundaryConditionViolated : public Error {
 public:
  using Error::Error;
};

// empirical
class NonAtomicTarget : public Error {
 public:
  using Error::Error;
};

// rate
class NotInOmega0 : public Error {
 public:
  using Error::Error;
};
class InfiniteRate : public Error {
 public:
  using Error::Error;
};
class NotInLambda : public Error {
 public:
  using Error::Error;
};

// rare_event
class EmptyWindow : public Error {
 public:
  using Error::Error;
};

/// Configuration validation failure carrying the offending line (1-based, 0 if unknown).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace hotwall
