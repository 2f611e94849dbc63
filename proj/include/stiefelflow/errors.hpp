#pragma once

#include <stdexcept>
#include <string>

namespace stiefelflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that must be symmetric positive definite is not.
class NotSPD : public Error {
 public:
  using Error::Error;
};

/// Operator norm of a momentum is outside the domain of the sinh inverse.
class NormTooLarge : public Error {
 public:
  NormTooLarge(double norm)
      : Error("operator norm " + std::to_string(norm) + " is not below 2"),
        norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// An algebraic constraint required on input (orthonormality, tangency,
/// costate level set) does not hold to tolerance.
class ConstraintViolated : public Error {
 public:
  ConstraintViolated(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class NewtonDiverged : public Error {
 public:
  NewtonDiverged(double residual, int iterations, long step = -1)
      : Error("Newton iteration did not converge after " +
              std::to_string(iterations) + " iterations (residual " +
              std::to_string(residual) + ")" +
              (step >= 0 ? " at step " + std::to_string(step) : std::string())),
        residual_(residual),
        iterations_(iterations),
        step_(step) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }
  /// Index of the failing step within a run, or -1 for a single step.
  long step() const { return step_; }

 private:
  double residual_;
  int iterations_;
  long step_;
};

class StepFailure : public Error {
 public:
  StepFailure(double t, double h)
      : Error("adaptive step underflow at t=" + std::to_string(t) +
              " (h=" + std::to_string(h) + ")"),
        t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

class ZeroPencilParam : public Error {
 public:
  ZeroPencilParam() : Error("pencil parameter must be nonzero") {}
};

class EmptySeries : public Error {
 public:
  using Error::Error;
};

class EmptyTrajectory : public Error {
 public:
  EmptyTrajectory() : Error("trajectory has no samples") {}
};

/// Invalid runner configuration. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error("config field '" + field + "': " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace stiefelflow
