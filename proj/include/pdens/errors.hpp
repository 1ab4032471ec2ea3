#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pdens {

/// phi_0(z) <= 0: the estimator chain lost monotonicity in the
/// preintegration variable. Always a configuration or implementation bug.
class MonotonicityError : public std::runtime_error {
 public:
  MonotonicityError(const std::string& what, std::vector<double> z_at)
      : std::runtime_error(what), z(std::move(z_at)) {}
  std::vector<double> z;
};

/// Solver non-convergence, singular system, or a non-finite value where a
/// finite one is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdens
