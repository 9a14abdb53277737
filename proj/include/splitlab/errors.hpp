#pragma once

#include <stdexcept>
#include <string>

namespace splitlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain of an operation (y <= 0, non-finite values, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A finite-difference or convergence requirement could not be met.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state or other breakdown during ODE integration.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Elliptic or parabolic element where a hyperbolic one is required.
class NotHyperbolicError : public DomainError {
 public:
  explicit NotHyperbolicError(double trace)
      : DomainError("not hyperbolic: |trace| = " + std::to_string(trace) + " <= 2"),
        trace_(trace) {}
  double trace() const { return trace_; }

 private:
  double trace_;
};

/// Riccati solution left the bounded regime (|U| > 1e6).
class FocalBlowUp : public Error {
 public:
  explicit FocalBlowUp(double time)
      : Error("focal blow-up at t = " + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Operation requested on a metric family it is not defined for.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Configuration or command-line validation failure.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace splitlab
