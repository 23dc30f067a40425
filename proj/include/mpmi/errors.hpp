#pragma once

#include <stdexcept>
#include <string>

namespace mpmi {

/// Base for everything the library throws. `name()` is a stable identifier
/// the CLI prints on standard error.
class Error : public std::runtime_error {
public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

/// Bad arguments: dimension mismatch, non-finite data, out-of-range parameter,
/// unparsable file.
class InputError : public Error {
public:
  explicit InputError(const std::string& what) : Error("input_error", what) {}
  InputError(std::string name, const std::string& what) : Error(std::move(name), what) {}
};

/// Raised when a solver cannot produce an answer for well-formed input.
class SolverError : public Error {
public:
  using Error::Error;
};

class FactorizationError : public SolverError {
public:
  FactorizationError(const std::string& what, long iterations)
      : SolverError("factorization_error", what), iterations_(iterations) {}

  long iterations() const noexcept { return iterations_; }

private:
  long iterations_;
};

/// h^2 reaches the total spectral energy, so only the zero matrix fits the ball.
class EnergyExceededError : public SolverError {
public:
  explicit EnergyExceededError(const std::string& what)
      : SolverError("error_level_exceeds_matrix_energy", what) {}
};

/// delta^2 + mu^2 >= |u|^2: the discrepancy equation has no root below the plateau.
class NoiseDominatesError : public SolverError {
public:
  explicit NoiseDominatesError(const std::string& what)
      : SolverError("noise_dominates_signal", what) {}
};

class BracketExhaustedError : public SolverError {
public:
  BracketExhaustedError(const std::string& what, double low_residual, double high_residual)
      : SolverError("bracket_exhausted", what),
        low_residual_(low_residual),
        high_residual_(high_residual) {}

  double low_residual() const noexcept { return low_residual_; }
  double high_residual() const noexcept { return high_residual_; }

private:
  double low_residual_;
  double high_residual_;
};

class UndefinedConditionError : public SolverError {
public:
  explicit UndefinedConditionError(const std::string& what)
      : SolverError("undefined_condition_number", what) {}
};

class ZeroRankError : public SolverError {
public:
  explicit ZeroRankError(const std::string& what) : SolverError("zero_rank", what) {}
};

}  // namespace mpmi
