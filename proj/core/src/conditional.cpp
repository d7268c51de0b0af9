#include "kmtc/conditional.hpp"

#include <algorithm>
#include <cmath>

#include "kmtc/errors.hpp"

namespace kmtc {

GridCdf conditional_diff_cdf(const GridDensity& p, const GridDensity& q,
                             double s, const ConditionalOptions& opts) {
  if (!p.grid.valid() || !q.grid.valid())
    throw GridError("conditional_diff_cdf: invalid grid");

  // w = 2a - s = s - 2b constrains w to the intersection below.
  double lo = std::max(2.0 * p.grid.lo - s, s - 2.0 * q.grid.hi);
  double hi = std::min(2.0 * p.grid.hi - s, s - 2.0 * q.grid.lo);
  if (opts.w_lo < opts.w_hi) {
    lo = std::max(lo, opts.w_lo);
    hi = std::min(hi, opts.w_hi);
  }
  if (!(hi > lo))
    throw ConditioningUnderflow("conditional_diff_cdf: empty support", s, 0.0);

  std::size_t n = opts.n_points;
  if (n == 0) n = std::clamp<std::size_t>(std::max(p.grid.n, q.grid.n), 257, 4097);
  if (n < 3) n = 3;

  GridCdf f;
  f.grid = Grid{lo, hi, n};
  f.values.assign(n, 0.0);
  const double h = f.grid.step();

  double prev = p.value_at((s + lo) / 2.0) * q.value_at((s - lo) / 2.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double w = f.grid.x(i);
    const double cur = p.value_at((s + w) / 2.0) * q.value_at((s - w) / 2.0);
    acc += 0.5 * h * (prev + cur);
    f.values[i] = acc;
    prev = cur;
  }
  if (!(acc > kConditioningUnderflowFloor))
    throw ConditioningUnderflow("conditional_diff_cdf: normalizer underflow", s, acc);

  f.total_mass = acc;
  for (double& v : f.values) v /= acc;
  f.values.back() = 1.0;
  return f;
}

}  // namespace kmtc
