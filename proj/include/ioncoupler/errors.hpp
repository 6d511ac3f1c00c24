#pragma once

#include <stdexcept>
#include <string>

namespace ioncoupler {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid physical or numerical input parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Inputs outside the range where an approximation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Resonant (zero-detuning) drive where a closed loop is required.
class SingularError : public Error {
 public:
  using Error::Error;
};

// A stated precondition (closure, stroboscopic time) is violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Internal consistency failure (e.g. non-Hermitian assembly).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class LeakageError : public Error {
 public:
  LeakageError(const std::string& mode, double population)
      : Error("Fock leakage in " + mode + " mode: top-level population " +
              std::to_string(population)),
        mode_(mode),
        population_(population) {}
  const std::string& mode() const { return mode_; }
  double population() const { return population_; }

 private:
  std::string mode_;
  double population_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ioncoupler
