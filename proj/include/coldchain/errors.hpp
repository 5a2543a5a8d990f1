#pragma once

#include <stdexcept>
#include <string>

namespace coldchain {

// Error hierarchy. Every error thrown by the library derives from one of the
// standard exception categories so callers can catch coarsely or precisely.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// The fiber supports zero or several guided HE11-type roots in the
/// guided window, so the single-mode model does not apply.
class GeometryNotSingleMode : public std::runtime_error {
 public:
  GeometryNotSingleMode(const std::string& what, int roots)
      : std::runtime_error(what), root_count_(roots) {}
  int root_count() const noexcept { return root_count_; }

 private:
  int root_count_;
};

class DegeneratePole : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigendecomposition could not reproduce the input matrix.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace coldchain
