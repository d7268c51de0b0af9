#pragma once

#include <functional>
#include <span>
#include <vector>

namespace kmtc {

// Quantile of a sorted sample, linear interpolation between order statistics.
double quantile_sorted(std::span<const double> sorted, double q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Two-sided Kolmogorov statistic of a sorted sample against a cdf.
double ks_statistic(std::span<const double> sorted,
                    const std::function<double(double)>& cdf);

// Runs fn(i) for i in [0, count) across at most jobs threads. Work items are
// handed out by an atomic cursor; writers must target disjoint slots so the
// result is identical for any job count.
void parallel_for(std::size_t count, unsigned jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace kmtc
