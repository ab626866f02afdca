#pragma once

#include <stdexcept>
#include <string>

namespace cfb {

/// Invalid physical parameter or precondition violation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A + i omega I is numerically singular: a pole of the linear response sits on the real axis.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, double omega)
      : std::runtime_error(what), omega_(omega) {}
  double omega() const noexcept { return omega_; }

 private:
  double omega_;
};

/// The requested operating point has gamma_m + Gamma_m <= 0.
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature or sampled-grid integration could not reach the requested accuracy.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimizer grid scan found no point satisfying the stability constraint.
class NoStableRegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or schema-violating configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfb
