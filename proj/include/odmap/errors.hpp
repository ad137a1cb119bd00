#pragma once

#include <stdexcept>
#include <string>

namespace odmap {

// Malformed input: dangling ids, wrong arity, schema mismatch.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a geometric or analytic precondition.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace odmap
