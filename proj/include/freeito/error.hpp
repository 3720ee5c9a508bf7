#pragma once

#include <stdexcept>
#include <string>

namespace freeito {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A function was evaluated outside its declared domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A user-supplied coefficient callback threw or returned a malformed value.
class CoefficientEvaluationError : public Error {
 public:
  using Error::Error;
};

// Simulated state left the finite range (‖M‖_F above the blow-up guard).
class Overflow : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace freeito
