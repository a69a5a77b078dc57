#pragma once

#include <stdexcept>
#include <string>

namespace vshp {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter or scenario file could not be read or parsed.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// A declared invariant on parameters or inputs is violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Model evaluation hit a singular or non-physical condition
/// (closed gate against flow, head collapse, diverged head solve, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Equilibrium solve failed.
class TrimError : public Error {
 public:
  TrimError(const std::string& what, int iterations, double residual, bool infeasible)
      : Error(what), iterations(iterations), residual(residual), infeasible(infeasible) {}

  int iterations;
  double residual;
  bool infeasible;
};

/// Time-domain simulation failed mid-run.
class SimError : public Error {
 public:
  using Error::Error;
};

}  // namespace vshp
