#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kmtc/grid.hpp"

namespace kmtc {

// Grid shape defaults for tabulating densities: range [-R, R] with
// R = radius_sigma * sigma_total + support radius, 2^14 points.
struct GridPolicy {
  double radius_sigma = 8.0;
  std::size_t n_points = std::size_t{1} << 14;
  std::size_t max_points = 3 * (std::size_t{1} << 14);
};

enum class FamilyKind { gaussian, poly_gaussian, smoothed_compact, conv_power };

// Compact-support building block for conv_power / smoothed_compact inner laws.
// Builtins: "raised_cosine" (C^1, p ~ 1 + cos(pi x / w)) and "triangle";
// "samples" carries an explicit mean-zero table on [lo, hi].
struct BaseDensity {
  std::string shape = "raised_cosine";
  double half_width = 1.0;
  Grid sample_grid;
  std::vector<double> samples;
};

// One scalar coordinate law. The struct describes the raw law; standardize()
// records the affine (scale, shift) that maps it to mean 0, variance 1, and
// the build/sampling paths apply it.
struct FamilySpec1D {
  FamilyKind kind = FamilyKind::gaussian;
  double var = 1.0;      // gaussian
  double tau = 0.5;      // poly_gaussian
  int d_param = 1;       // poly_gaussian density dimension (engine needs 1)
  double b2 = 0.25;      // smoothed_compact smoothing variance
  std::shared_ptr<const FamilySpec1D> inner;  // smoothed_compact
  BaseDensity base;      // conv_power
  std::uint64_t m = 1;   // conv_power
  double scale = 1.0;
  double shift = 0.0;
};

// Product law on R^d: independent coordinates, one spec each.
struct ProductFamily {
  std::vector<FamilySpec1D> coords;
  unsigned d() const { return static_cast<unsigned>(coords.size()); }
};

// sqrt((4 + tau^2 (d + 2)) / (4 + tau^2 d)): the coordinate std deviation of
// the raw polynomial-Gaussian law; lies in [1, sqrt(3)].
double polygauss_gamma(double tau, int d);

// Raw 1-D polynomial-Gaussian density (4 + tau^2 x^2) phi(x) / (4 + tau^2)
// and its closed-form cdf Phi(z) - tau^2 z phi(z) / (4 + tau^2).
double polygauss_pdf1(double tau, double x);
double polygauss_cdf1(double tau, double x);

// Raw d-dimensional density at radius r:
// (4 + tau^2 r^2) exp(-r^2/2) / ((2 pi)^{d/2} (4 + tau^2 d)).
double polygauss_pdf(double tau, int d, double r);

// Variance / mean of the raw (pre-standardization) law. Nested inner specs
// are taken with their own recorded affine applied.
double family_variance(const FamilySpec1D& spec);
double family_mean(const FamilySpec1D& spec);

// Moments after applying the spec's own (scale, shift).
double effective_variance(const FamilySpec1D& spec);
double effective_mean(const FamilySpec1D& spec);

// Fills in (scale, shift) so the standardized law has mean 0, variance 1.
FamilySpec1D standardize(FamilySpec1D spec);

// Tabulates the standardized density (scale/shift applied).
GridDensity build_density(const FamilySpec1D& spec, const GridPolicy& policy = {});

// Compact base table used by conv_power / smoothed_compact.
GridDensity build_base_density(const BaseDensity& base, double step_hint);

// Closed-form standardized cdf where one exists (gaussian, poly_gaussian d=1).
// Returns false if the family has no closed form.
bool family_cdf_closed_form(const FamilySpec1D& spec, double x, double& out);

ProductFamily replicate(const FamilySpec1D& spec, unsigned d);

// Short deterministic text id, e.g. "poly_gaussian(tau=0.3,d=1)".
std::string family_label(const FamilySpec1D& spec);

}  // namespace kmtc
