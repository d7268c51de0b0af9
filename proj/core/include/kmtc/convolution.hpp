#pragma once

#include <cstdint>
#include <limits>

#include "kmtc/grid.hpp"

namespace kmtc {

// Cropping / size policy applied after each convolution step.
//
// max_radius crops the output to |x| <= max_radius (lattice-preserving slice);
// radius_sigma, if positive, crops adaptively to radius_sigma * sqrt(var) +
// radius_pad instead. max_points, if positive, decimates by 2 whenever the
// table grows past it. Cropped tail mass is added to discarded_mass and the
// table is renormalized to unit mass.
struct ConvPolicy {
  double max_radius = std::numeric_limits<double>::infinity();
  double radius_sigma = 0.0;
  double radius_pad = 0.0;
  std::size_t max_points = 0;
};

// Linear convolution of two densities tabulated with equal steps. FFT-based:
// zero-pads to the next power of two past full linear length, multiplies,
// inverse-transforms, clips FFT ringing at zero, then crops and renormalizes
// per the policy.
GridDensity convolve(const GridDensity& p, const GridDensity& q,
                     const ConvPolicy& policy = {});

// 2^m-fold self-convolution by repeated squaring (m <= 24), applying the
// policy after every squaring.
GridDensity self_convolve_pow2(const GridDensity& p, unsigned m,
                               const ConvPolicy& policy = {});

// m-fold self-convolution for arbitrary m >= 1 via binary decomposition.
GridDensity convolve_power(const GridDensity& p, std::uint64_t m,
                           const ConvPolicy& policy = {});

// N(0, sigma^2) tabulated on the given grid (renormalized on the grid).
GridDensity gaussian_density_on(const Grid& g, double sigma);

}  // namespace kmtc
