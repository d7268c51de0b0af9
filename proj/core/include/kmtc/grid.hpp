#pragma once

#include <cstddef>
#include <vector>

namespace kmtc {

// Uniform closed grid on [lo, hi] with n >= 2 points.
struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;

  double step() const { return (hi - lo) / static_cast<double>(n - 1); }
  double x(std::size_t i) const { return lo + step() * static_cast<double>(i); }
  bool valid() const { return n >= 2 && hi > lo; }
};

// Tabulated density. values[i] = p(x_i) >= 0. After construction the trapezoid
// mass is 1; total_mass records the raw mass before the final renormalization
// and discarded_mass accumulates tail mass cropped away by grid-bounded ops.
struct GridDensity {
  Grid grid;
  std::vector<double> values;
  double total_mass = 1.0;
  double discarded_mass = 0.0;

  // Linear interpolation; zero outside [lo, hi].
  double value_at(double x) const;
  double mass() const;  // trapezoid mass of the current table
  double mean() const;
  double variance() const;
};

// Tabulated cdf on the same grid convention. values monotone, values[0] = 0,
// values[n-1] = 1. total_mass keeps the unnormalized mass for diagnostics.
struct GridCdf {
  Grid grid;
  std::vector<double> values;
  double total_mass = 1.0;

  double value_at(double x) const;  // clamps to {0, 1} outside the range
  // Rightmost x with F(x) <= u; monotone linear interpolation inside cells.
  double invert(double u) const;
};

// Trapezoid antiderivative of p, normalized so the last node is exactly 1.
GridCdf cdf_of(const GridDensity& p);

// Validating form: throws NumericError unless 0 < u < 1. The member invert
// saturates instead so internal compositions with saturated cdf values stay
// total.
double invert_cdf(const GridCdf& f, double u);

// Renormalizes values in place so the trapezoid mass is exactly 1; returns the
// mass that was there before. Throws NumericError if the mass is not positive.
double normalize_density(GridDensity& p);

// Law of a * xi for a > 0: exact grid relabel, no resampling.
GridDensity scaled_density(const GridDensity& p, double a);

// Exact subsampling by integer stride (keeps every stride-th node), then
// renormalizes. Used to keep per-level tables at a bounded point count.
GridDensity decimated_density(const GridDensity& p, std::size_t stride);

}  // namespace kmtc
