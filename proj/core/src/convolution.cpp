#include "kmtc/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <vector>

#include "kmtc/errors.hpp"
#include "kmtc/gaussian.hpp"

namespace kmtc {

namespace {

// FFTW plan creation is not thread-safe; execution of a created plan is.
std::mutex g_fftw_mutex;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Real linear convolution of a (length na) and b (length nb), result length
// na + nb - 1. Deterministic: FFTW_ESTIMATE picks a fixed algorithm.
std::vector<double> fft_linear_convolve(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  const std::size_t nl = a.size() + b.size() - 1;
  const std::size_t nfft = next_pow2(nl);
  const std::size_t nc = nfft / 2 + 1;

  double* ra = fftw_alloc_real(nfft);
  double* rb = fftw_alloc_real(nfft);
  fftw_complex* ca = fftw_alloc_complex(nc);
  fftw_complex* cb = fftw_alloc_complex(nc);

  std::memset(ra, 0, nfft * sizeof(double));
  std::memset(rb, 0, nfft * sizeof(double));
  std::copy(a.begin(), a.end(), ra);
  std::copy(b.begin(), b.end(), rb);

  fftw_plan pf_a, pf_b, pb;
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    pf_a = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), ra, ca, FFTW_ESTIMATE);
    pf_b = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), rb, cb, FFTW_ESTIMATE);
    pb = fftw_plan_dft_c2r_1d(static_cast<int>(nfft), ca, ra, FFTW_ESTIMATE);
  }
  fftw_execute(pf_a);
  fftw_execute(pf_b);
  for (std::size_t i = 0; i < nc; ++i) {
    const double re = ca[i][0] * cb[i][0] - ca[i][1] * cb[i][1];
    const double im = ca[i][0] * cb[i][1] + ca[i][1] * cb[i][0];
    ca[i][0] = re;
    ca[i][1] = im;
  }
  fftw_execute(pb);

  std::vector<double> out(nl);
  const double scale = 1.0 / static_cast<double>(nfft);
  for (std::size_t i = 0; i < nl; ++i) out[i] = ra[i] * scale;

  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    fftw_destroy_plan(pf_a);
    fftw_destroy_plan(pf_b);
    fftw_destroy_plan(pb);
  }
  fftw_free(ra);
  fftw_free(rb);
  fftw_free(ca);
  fftw_free(cb);
  return out;
}

void apply_policy(GridDensity& p, const ConvPolicy& policy) {
  double radius = policy.max_radius;
  if (policy.radius_sigma > 0.0) {
    const double sd = std::sqrt(p.variance());
    radius = std::min(radius, policy.radius_sigma * sd + policy.radius_pad);
  }
  if (std::isfinite(radius) &&
      (p.grid.lo < -radius - p.grid.step() || p.grid.hi > radius + p.grid.step())) {
    std::size_t i0 = 0;
    while (i0 + 2 < p.grid.n && p.grid.x(i0) < -radius) ++i0;
    std::size_t i1 = p.grid.n - 1;
    while (i1 > i0 + 1 && p.grid.x(i1) > radius) --i1;
    if (i0 > 0 || i1 < p.grid.n - 1) {
      GridDensity cropped;
      cropped.grid = Grid{p.grid.x(i0), p.grid.x(i1), i1 - i0 + 1};
      cropped.values.assign(p.values.begin() + static_cast<std::ptrdiff_t>(i0),
                            p.values.begin() + static_cast<std::ptrdiff_t>(i1) + 1);
      cropped.discarded_mass = p.discarded_mass;
      const double before = p.mass();
      const double after = cropped.mass();
      cropped.discarded_mass += std::max(0.0, before - after);
      p = std::move(cropped);
    }
  }
  if (policy.max_points > 0 && p.grid.n > policy.max_points) {
    p = decimated_density(p, 2);
  }
  normalize_density(p);
}

}  // namespace

GridDensity convolve(const GridDensity& p, const GridDensity& q,
                     const ConvPolicy& policy) {
  if (!p.grid.valid() || !q.grid.valid())
    throw GridError("convolve: invalid grid");
  const double hp = p.grid.step();
  const double hq = q.grid.step();
  if (std::abs(hp - hq) > 1e-9 * std::max(hp, hq))
    throw GridError("convolve: mismatched grid steps");

  std::vector<double> raw = fft_linear_convolve(p.values, q.values);
  GridDensity out;
  out.grid = Grid{p.grid.lo + q.grid.lo, 0.0, raw.size()};
  out.grid.hi = out.grid.lo + hp * static_cast<double>(raw.size() - 1);
  for (double& v : raw) {
    v *= hp;                    // Riemann weight
    if (v < 0.0) v = 0.0;       // FFT ringing, ~1e-16 scale
  }
  out.values = std::move(raw);
  out.discarded_mass = p.discarded_mass + q.discarded_mass;
  const double m = out.mass();
  // A trapezoid-integrable density convolved on the lattice keeps mass to
  // ~1e-12; anything larger means the inputs already lost real tail mass.
  out.discarded_mass += std::max(0.0, 1.0 - m);
  apply_policy(out, policy);
  return out;
}

GridDensity self_convolve_pow2(const GridDensity& p, unsigned m,
                               const ConvPolicy& policy) {
  if (m > 24) throw NumericError("self_convolve_pow2: m > 24");
  GridDensity cur = p;
  for (unsigned i = 0; i < m; ++i) cur = convolve(cur, cur, policy);
  return cur;
}

GridDensity convolve_power(const GridDensity& p, std::uint64_t m,
                           const ConvPolicy& policy) {
  if (m == 0) throw NumericError("convolve_power: m must be >= 1");
  GridDensity sq = p;
  GridDensity result;
  bool have_result = false;
  while (m > 0) {
    if (m & 1) {
      result = have_result ? convolve(result, sq, policy) : sq;
      have_result = true;
    }
    m >>= 1;
    if (m > 0) sq = convolve(sq, sq, policy);
  }
  return result;
}

GridDensity gaussian_density_on(const Grid& g, double sigma) {
  GridDensity p;
  p.grid = g;
  p.values.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) p.values[i] = gaussian_pdf(g.x(i), sigma);
  normalize_density(p);
  return p;
}

}  // namespace kmtc
