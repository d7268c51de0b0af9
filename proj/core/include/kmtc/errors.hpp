#pragma once

#include <stdexcept>
#include <string>

namespace kmtc {

// Numeric failures map to CLI exit code 2; probe/bound violations are reported
// through result structs instead of exceptions.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridError : NumericError {
  using NumericError::NumericError;
};

// Thrown when a requested operation needs mass outside the tabulated range.
// required_radius is a usable hint for rebuilding the input on a wider grid.
struct RangeError : NumericError {
  RangeError(const std::string& what, double required_radius_)
      : NumericError(what), required_radius(required_radius_) {}
  double required_radius = 0.0;
};

// Degenerate conditioning: the conditional normalizer fell below the floor.
struct ConditioningUnderflow : NumericError {
  ConditioningUnderflow(const std::string& what, double s_, double mass_)
      : NumericError(what), s(s_), mass(mass_) {}
  double s = 0.0;
  double mass = 0.0;
};

inline constexpr double kConditioningUnderflowFloor = 1e-300;

}  // namespace kmtc
