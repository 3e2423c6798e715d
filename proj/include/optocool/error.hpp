#pragma once

#include <stdexcept>
#include <string>

namespace optocool {

// Exception hierarchy. The CLI maps each family onto a process exit code.

/// Bad input: negative rates, malformed config, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: degenerate denominators, non-convergence, trace drift.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised where a stationary phonon state is required but Gamma <= 0.
class NoStationaryState : public NumericalError {
 public:
  explicit NoStationaryState(const std::string& what) : NumericalError(what) {}
};

/// The resonance denominator D vanished (g = 0 and a fully undamped crossing).
class DegenerateDenominator : public NumericalError {
 public:
  explicit DegenerateDenominator(const std::string& what) : NumericalError(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace optocool
