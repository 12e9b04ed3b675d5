#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Thrown when an operand has the wrong size for the object it is applied to.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a linear solve that should be SPD fails or does not reach the
// stationarity tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tol {
// Relative slack applied to [alpha, beta] when validating Hessian spectra.
inline constexpr double kEigenRelative = 1e-9;
// Slack on the unit-ball constraint for minimizers.
inline constexpr double kUnitBall = 1e-12;
// Stationarity residual: ||grad|| <= kStationarity * (1 + ||x||).
inline constexpr double kStationarity = 1e-9;
// Bound comparison: observed <= bound + kBound * (1 + |bound|).
inline constexpr double kBound = 1e-9;
// lambda_1 must vanish to within this absolute tolerance.
inline constexpr double kSpectrum = 1e-9;
}  // namespace tol

inline void require_size(Eigen::Index actual, Eigen::Index expected, const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + ": expected size " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

}  // namespace odgd
