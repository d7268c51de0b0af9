#include "kmtc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "kmtc/errors.hpp"

namespace kmtc {

namespace {

double trapezoid_mass(const Grid& g, const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  sum -= 0.5 * (v.front() + v.back());
  return sum * g.step();
}

}  // namespace

double GridDensity::value_at(double x) const {
  if (x < grid.lo || x > grid.hi) return 0.0;
  const double t = (x - grid.lo) / grid.step();
  std::size_t i = static_cast<std::size_t>(t);
  if (i >= grid.n - 1) i = grid.n - 2;
  const double frac = t - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

double GridDensity::mass() const { return trapezoid_mass(grid, values); }

double GridDensity::mean() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double w = (i == 0 || i == grid.n - 1) ? 0.5 : 1.0;
    sum += w * grid.x(i) * values[i];
  }
  return sum * grid.step() / mass();
}

double GridDensity::variance() const {
  const double m = mean();
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double w = (i == 0 || i == grid.n - 1) ? 0.5 : 1.0;
    const double c = grid.x(i) - m;
    sum += w * c * c * values[i];
  }
  return sum * grid.step() / mass();
}

double GridCdf::value_at(double x) const {
  if (x <= grid.lo) return 0.0;
  if (x >= grid.hi) return 1.0;
  const double t = (x - grid.lo) / grid.step();
  std::size_t i = static_cast<std::size_t>(t);
  if (i >= grid.n - 1) i = grid.n - 2;
  const double frac = t - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

double GridCdf::invert(double u) const {
  if (!(u > 0.0)) return grid.lo;
  if (u >= 1.0) return grid.hi;
  // First node strictly above u; upper_bound skips the whole flat run, so the
  // preceding node is the rightmost one with F <= u.
  const auto it = std::upper_bound(values.begin(), values.end(), u);
  if (it == values.begin()) return grid.lo;
  if (it == values.end()) return grid.hi;
  const std::size_t i = static_cast<std::size_t>(it - values.begin()) - 1;
  const double f0 = values[i];
  if (f0 >= u) return grid.x(i);  // exact hit: rightmost point of the flat run
  const double f1 = values[i + 1];
  return grid.x(i) + grid.step() * (u - f0) / (f1 - f0);
}

GridCdf cdf_of(const GridDensity& p) {
  GridCdf f;
  f.grid = p.grid;
  f.values.resize(p.grid.n);
  f.values[0] = 0.0;
  const double h = p.grid.step();
  double acc = 0.0;
  for (std::size_t i = 1; i < p.grid.n; ++i) {
    acc += 0.5 * h * (p.values[i - 1] + p.values[i]);
    f.values[i] = acc;
  }
  if (!(acc > 0.0)) throw NumericError("cdf_of: density has non-positive mass");
  f.total_mass = acc;
  for (double& v : f.values) v /= acc;
  f.values.back() = 1.0;
  return f;
}

double invert_cdf(const GridCdf& f, double u) {
  if (!(u > 0.0 && u < 1.0))
    throw NumericError("invert_cdf: u must be in (0, 1)");
  return f.invert(u);
}

double normalize_density(GridDensity& p) {
  const double m = p.mass();
  if (!(m > 0.0)) throw NumericError("normalize_density: non-positive mass");
  for (double& v : p.values) v /= m;
  p.total_mass = m;
  return m;
}

GridDensity scaled_density(const GridDensity& p, double a) {
  if (!(a > 0.0)) throw NumericError("scaled_density: scale must be positive");
  GridDensity q;
  q.grid = Grid{p.grid.lo * a, p.grid.hi * a, p.grid.n};
  q.values.resize(p.grid.n);
  for (std::size_t i = 0; i < p.grid.n; ++i) q.values[i] = p.values[i] / a;
  q.total_mass = p.total_mass;
  q.discarded_mass = p.discarded_mass;
  return q;
}

GridDensity decimated_density(const GridDensity& p, std::size_t stride) {
  if (stride < 1) throw NumericError("decimated_density: bad stride");
  if (stride == 1) return p;
  GridDensity q;
  const std::size_t n = (p.grid.n - 1) / stride + 1;
  if (n < 2) throw GridError("decimated_density: too few points left");
  q.grid = Grid{p.grid.lo, p.grid.x((n - 1) * stride), n};
  q.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) q.values[i] = p.values[i * stride];
  q.discarded_mass = p.discarded_mass;
  normalize_density(q);
  return q;
}

}  // namespace kmtc
