#pragma once

// Independent reference implementations used to cross-check library results.
// Everything here is deliberately simple and slow: direct quadrature, direct
// summation, bisection. Nothing calls back into the code paths under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "kmtc/grid.hpp"

namespace oracle {

inline double gaussian_cdf(double x, double sigma = 1.0) {
  return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0)));
}

inline double gaussian_pdf(double x, double sigma = 1.0) {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

// Bisection inverse of the erfc-based cdf; accurate to ~1e-12 in x.
inline double gaussian_quantile(double u, double sigma = 1.0) {
  double lo = -40.0 * sigma, hi = 40.0 * sigma;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_cdf(mid, sigma) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Direct O(n*m) linear convolution of two equal-step tables by quadrature:
// (p * q)(x_k) = sum_j p(x_j) q(x_k - x_j) * step.
inline kmtc::GridDensity convolve_direct(const kmtc::GridDensity& p,
                                         const kmtc::GridDensity& q) {
  const double h = p.grid.step();
  kmtc::GridDensity out;
  out.grid.lo = p.grid.lo + q.grid.lo;
  out.grid.hi = p.grid.hi + q.grid.hi;
  out.grid.n = p.grid.n + q.grid.n - 1;
  out.values.assign(out.grid.n, 0.0);
  for (std::size_t i = 0; i < p.grid.n; ++i) {
    if (p.values[i] == 0.0) continue;
    for (std::size_t j = 0; j < q.grid.n; ++j)
      out.values[i + j] += p.values[i] * q.values[j] * h;
  }
  double m = 0.0;
  for (std::size_t i = 0; i < out.grid.n; ++i)
    m += out.values[i] * ((i == 0 || i == out.grid.n - 1) ? 0.5 : 1.0) * h;
  for (double& v : out.values) v /= m;
  return out;
}

// Conditional cdf of W = A - B given A + B = s by direct trapezoid of
// p((s+w)/2) q((s-w)/2) over the given w nodes.
inline std::vector<double> conditional_cdf_direct(const kmtc::GridDensity& p,
                                                  const kmtc::GridDensity& q,
                                                  double s,
                                                  const std::vector<double>& w) {
  std::vector<double> f(w.size()), cdf(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    f[i] = p.value_at(0.5 * (s + w[i])) * q.value_at(0.5 * (s - w[i]));
  for (std::size_t i = 1; i < w.size(); ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (w[i] - w[i - 1]) * (f[i] + f[i - 1]);
  const double z = cdf.back();
  for (double& v : cdf) v /= z;
  return cdf;
}

// Two-sided Kolmogorov distance of a sorted sample against a cdf.
inline double ks_direct(const std::vector<double>& sorted,
                        const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Upper quantile of the Kolmogorov distribution scaled to sample size n:
// P{D_n > ks_critical(n, alpha)} ~= alpha.
inline double ks_critical(std::size_t n, double alpha) {
  // Invert 2 sum (-1)^{k-1} exp(-2 k^2 x^2) = alpha by bisection on x.
  auto tail = [](double x) {
    double t = 0.0;
    for (int k = 1; k <= 100; ++k)
      t += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
    return t;
  };
  double lo = 0.2, hi = 4.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tail(mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

inline double sup_diff(const std::vector<double>& a,
                       const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace oracle
