#pragma once

#include <stdexcept>
#include <string>

namespace hinfx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (dimensions, definiteness, file syntax).
class InputError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class UnboundedError : public Error {
 public:
  using Error::Error;
};

/// A point was queried outside the domain of a piecewise function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// The active-set matrix lost row rank; caller may retry with a subset.
class DegenerateActiveSetError : public Error {
 public:
  using Error::Error;
};

/// Convexity/concavity preconditions of a parametric solve do not hold.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// The attenuation level is too small for the inner maximization.
class GammaInfeasibleError : public Error {
 public:
  using Error::Error;
};

class NotStabilizableError : public Error {
 public:
  using Error::Error;
};

/// A closed-loop property that theory guarantees was observed to fail.
class CertificateViolation : public Error {
 public:
  CertificateViolation(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Wraps an error raised while computing a given DP stage.
class StageError : public Error {
 public:
  StageError(int stage, const std::string& what)
      : Error("stage " + std::to_string(stage) + ": " + what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

}  // namespace hinfx
