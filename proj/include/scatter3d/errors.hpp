#pragma once

#include <stdexcept>
#include <string>

namespace scatter3d {

/// Input outside the mathematical domain of an operation (maps to exit code 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Spectral parameter too close to an element of N3.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The annulus ||xi|^2 - lambda| < L contains no lattice point.
class EmptyAnnulus : public DomainError {
 public:
  EmptyAnnulus(double lambda, double width)
      : DomainError("EmptyAnnulus: no lattice point with ||xi|^2 - " + std::to_string(lambda) +
                    "| < " + std::to_string(width)),
        lambda_(lambda),
        width_(width) {}
  double lambda() const { return lambda_; }
  double width() const { return width_; }

 private:
  double lambda_;
  double width_;
};

/// A bracket failed its sign test during root finding.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A table would exceed the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad numerical parameters (resolution below Nyquist, malformed options, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration or input file problems; reported before any computation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scatter3d
