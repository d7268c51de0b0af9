#pragma once

#include "kmtc/family.hpp"
#include "kmtc/grid.hpp"
#include "kmtc/rng.hpp"

namespace kmtc {

// Inverse-cdf sampler over a tabulated density.
class GridSampler {
 public:
  explicit GridSampler(const GridDensity& p) : cdf_(cdf_of(p)) {}
  explicit GridSampler(GridCdf cdf) : cdf_(std::move(cdf)) {}

  double draw(RngStream& g) const { return cdf_.invert(g.next_uniform()); }
  const GridCdf& cdf() const { return cdf_; }

 private:
  GridCdf cdf_;
};

// Exact sampler for a FamilySpec1D (standardization affine applied):
//  - gaussian: sigma * g
//  - poly_gaussian (d_param = 1): mixture of N(0,1) with weight 4/(4+tau^2)
//    and the symmetrized Maxwell law |N_3(0,I)| * random sign, whose density
//    is x^2 phi(x)
//  - smoothed_compact: inner draw + N(0, b2)
//  - conv_power: sum of m base draws via grid inverse cdf, divided by sqrt(m)
class FamilySampler {
 public:
  explicit FamilySampler(const FamilySpec1D& spec);
  double draw(RngStream& g) const;

 private:
  FamilySpec1D spec_;
  std::unique_ptr<FamilySampler> inner_;
  std::unique_ptr<GridSampler> base_sampler_;
  double sqrt_m_ = 1.0;
  double sb_ = 0.0;
};

}  // namespace kmtc
