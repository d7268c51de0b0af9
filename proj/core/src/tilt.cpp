#include "kmtc/tilt.hpp"

#include <cmath>
#include <limits>

#include "kmtc/errors.hpp"

namespace kmtc {

namespace {

// log of the trapezoid integral of e^{z x} p(x), stabilized by the max
// exponent over nonzero nodes.
double log_trapz_tilted(const GridDensity& p, double z) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.grid.n; ++i) {
    if (p.values[i] > 0.0) {
      const double e = z * p.grid.x(i) + std::log(p.values[i]);
      if (e > m) m = e;
    }
  }
  if (!std::isfinite(m)) throw NumericError("log_mgf: empty density");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.grid.n; ++i) {
    if (p.values[i] <= 0.0) continue;
    const double w = (i == 0 || i == p.grid.n - 1) ? 0.5 : 1.0;
    sum += w * std::exp(z * p.grid.x(i) + std::log(p.values[i]) - m);
  }
  return m + std::log(sum * p.grid.step());
}

}  // namespace

double log_mgf(const GridDensity& p, double z) {
  if (z == 0.0) return 0.0;
  return log_trapz_tilted(p, z) - log_trapz_tilted(p, 0.0);
}

GridDensity tilt(const GridDensity& p, double h) {
  GridDensity q;
  q.grid = p.grid;
  q.values.resize(p.grid.n);
  const double lz = log_trapz_tilted(p, h);
  for (std::size_t i = 0; i < p.grid.n; ++i) {
    q.values[i] = (p.values[i] > 0.0)
                      ? std::exp(h * p.grid.x(i) + std::log(p.values[i]) - lz)
                      : 0.0;
  }
  normalize_density(q);

  // Mass hugging the grid edges means the conjugate law spills off-range.
  const double h_step = q.grid.step();
  const std::size_t edge = std::max<std::size_t>(2, q.grid.n / 256);
  double edge_mass = 0.0;
  for (std::size_t i = 0; i < edge; ++i)
    edge_mass += (q.values[i] + q.values[q.grid.n - 1 - i]) * h_step;
  if (edge_mass > 1e-10) {
    const double sd = std::sqrt(p.variance());
    const double hint =
        std::max(std::abs(q.grid.lo), q.grid.hi) + std::abs(h) * sd * sd + 8.0 * sd;
    throw RangeError("tilt: mass reaches the grid edge, rebuild wider", hint);
  }
  q.discarded_mass = p.discarded_mass;
  return q;
}

double tilted_mean(const GridDensity& p, double h) {
  return tilt(p, h).mean();
}

}  // namespace kmtc
