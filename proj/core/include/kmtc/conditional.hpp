#pragma once

#include <limits>

#include "kmtc/grid.hpp"

namespace kmtc {

struct ConditionalOptions {
  std::size_t n_points = 0;  // 0: derived from the input grids
  // Optional window intersected with the geometric support of w.
  double w_lo = std::numeric_limits<double>::infinity();
  double w_hi = -std::numeric_limits<double>::infinity();
};

// Conditional cdf of W = A - B given A + B = s, for independent A ~ p, B ~ q.
// f(w | s) is proportional to p((s + w) / 2) * q((s - w) / 2) on the w-window
// where both factors can be nonzero. Throws ConditioningUnderflow when the
// normalizer falls below kConditioningUnderflowFloor (callers that need a
// fallback substitute a Gaussian conditional and flag the event).
GridCdf conditional_diff_cdf(const GridDensity& p, const GridDensity& q,
                             double s, const ConditionalOptions& opts = {});

}  // namespace kmtc
