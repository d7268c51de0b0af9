#include "kmtc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "kmtc/conditional.hpp"
#include "kmtc/convolution.hpp"
#include "kmtc/errors.hpp"
#include "kmtc/gaussian.hpp"
#include "kmtc/rng.hpp"
#include "kmtc/sampling.hpp"
#include "kmtc/stats.hpp"
#include "kmtc/tilt.hpp"

namespace kmtc {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kLogFloor = -690.0;  // log of the smallest useful modulus

double pow2d(unsigned n) { return std::ldexp(1.0, static_cast<int>(n)); }

// Tabulates the law wide enough that tilting by |h| <= hmax stays on-grid.
GridDensity density_for_tilt(const FamilySpec1D& spec, double hmax,
                             GridPolicy gp) {
  const double sigma = std::sqrt(effective_variance(spec));
  gp.radius_sigma += 2.0 * std::abs(hmax) * sigma;
  for (int attempt = 0; attempt < 6; ++attempt) {
    GridDensity p = build_density(spec, gp);
    if (hmax == 0.0) return p;
    try {
      (void)tilt(p, hmax);
      (void)tilt(p, -hmax);
      return p;
    } catch (const RangeError& e) {
      gp.radius_sigma += std::max(2.0, e.required_radius / sigma -
                                           gp.radius_sigma);
    }
  }
  throw RangeError("density_for_tilt: cannot widen grid enough", 0.0);
}

std::size_t default_axis_points(unsigned j) {
  switch (j) {
    case 1: return 257;
    case 2: return 129;
    case 3: return 49;
    default: return 25;
  }
}

std::vector<double> simpson_weights(double lo, double hi, std::size_t n) {
  // n odd; weights include the step factor.
  const double h = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] = c * h / 3.0;
  }
  return w;
}

// Linear interpolation into a log-modulus table over a uniform u-grid.
struct LogCfTable {
  double lo = 0.0;
  double step = 1.0;
  std::vector<double> vals;

  double at(double u) const {
    double t = (u - lo) / step;
    if (t <= 0.0) return vals.front();
    const double tmax = static_cast<double>(vals.size() - 1);
    if (t >= tmax) return vals.back();
    const std::size_t i = static_cast<std::size_t>(t);
    const double f = t - static_cast<double>(i);
    return vals[i] + f * (vals[i + 1] - vals[i]);
  }
};

LogCfTable log_cf_table(const GridDensity& p, double h, double umax,
                        std::size_t nu) {
  LogCfTable tab;
  tab.lo = -umax;
  tab.step = 2.0 * umax / static_cast<double>(nu - 1);
  std::vector<double> us(nu);
  for (std::size_t i = 0; i < nu; ++i)
    us[i] = tab.lo + tab.step * static_cast<double>(i);
  const std::vector<double> cf = cf_abs_table(p, h, us);
  tab.vals.resize(nu);
  for (std::size_t i = 0; i < nu; ++i)
    tab.vals[i] = cf[i] > 0.0 ? std::max(std::log(cf[i]), kLogFloor)
                              : kLogFloor;
  return tab;
}

}  // namespace

ClassReport estimate_tau(const FamilySpec1D& spec, TauOptions opts) {
  ClassReport rep;
  rep.family_id = family_label(spec);

  double zr = opts.z_radius;
  const double h = opts.fd_step;
  GridDensity p;
  for (int attempt = 0;; ++attempt) {
    try {
      p = density_for_tilt(spec, zr + 2.0 * h, opts.grid);
      break;
    } catch (const RangeError&) {
      if (attempt >= 10 || zr < 1e-3) throw;
      zr *= 0.8;  // MGF leaves the grid; shrink the tested radius
    }
  }
  rep.z_radius_used = zr;

  const auto phi = [&](double z) { return log_mgf(p, z); };
  rep.var_normalizer = (-phi(2.0 * h) + 16.0 * phi(h) + 16.0 * phi(-h) -
                        phi(-2.0 * h)) /
                       (12.0 * h * h);
  if (!(rep.var_normalizer > 0.0))
    throw NumericError("estimate_tau: non-positive curvature at zero");

  const std::size_t nz = std::max<std::size_t>(opts.n_z, 3);
  rep.witnesses.reserve(nz);
  for (std::size_t i = 0; i < nz; ++i) {
    const double z =
        -zr + 2.0 * zr * static_cast<double>(i) / static_cast<double>(nz - 1);
    const double third = (phi(z + 2.0 * h) - 2.0 * phi(z + h) +
                          2.0 * phi(z - h) - phi(z - 2.0 * h)) /
                         (2.0 * h * h * h);
    rep.witnesses.push_back({z, std::abs(third)});
    rep.max_third = std::max(rep.max_third, std::abs(third));
  }
  rep.tau_hat = rep.max_third / rep.var_normalizer;
  return rep;
}

std::vector<double> cf_abs_table(const GridDensity& p, double h,
                                 const std::vector<double>& ts) {
  const std::size_t n = p.grid.n;
  std::vector<double> g(n), xs(n);
  // Shift by the peak of h*x + log p(x); shifting by the edge exponent alone
  // underflows everything once |h| * radius is large.
  double K = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = p.grid.x(i);
    if (p.values[i] > 0.0)
      K = std::max(K, h * xs[i] + std::log(p.values[i]));
  }
  if (!std::isfinite(K)) throw NumericError("cf_abs: empty density");
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    g[i] = p.values[i] > 0.0
               ? w * std::exp(h * xs[i] + std::log(p.values[i]) - K)
               : 0.0;
    z += g[i];
  }
  if (!(z > 0.0)) throw NumericError("cf_abs: tilted mass vanished");

  std::vector<double> out(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const double t = ts[j];
    if (t == 0.0) {
      out[j] = 1.0;
      continue;
    }
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      re += g[i] * std::cos(t * xs[i]);
      im += g[i] * std::sin(t * xs[i]);
    }
    double v = std::sqrt(re * re + im * im) / z;
    if (v < 1e-300) v = 0.0;
    out[j] = std::min(v, 1.0);
  }
  return out;
}

double cf_abs(const GridDensity& p, double h, double t) {
  return cf_abs_table(p, h, {t})[0];
}

ProbeReport check_smoothness_integrals(const ProductFamily& fam, double tau,
                                       unsigned n_level, unsigned j,
                                       SmoothnessOptions opts) {
  const unsigned d = fam.d();
  if (j < 1 || j > 2 * d)
    throw NumericError("check_smoothness_integrals: j must be in [1, 2d]");
  if (j > 4)
    throw NumericError("check_smoothness_integrals: tensor quadrature capped at j=4");
  if (n_level < 1 || n_level > 20)
    throw NumericError("check_smoothness_integrals: bad level");

  ProbeReport rep;
  {
    std::ostringstream os;
    os << "smoothness_integral(n=" << n_level << ",j=" << j << ")";
    rep.name = os.str();
  }
  rep.fitted["tau"] = tau;
  rep.fitted["rho"] = opts.rho;

  const double sigma = std::sqrt(pow2d(n_level));
  const double sqrt_det = std::pow(2.0, 0.5 * n_level * j);
  const double bound = std::pow(kTwoPi, 0.5 * j) * tau *
                       std::pow(static_cast<double>(j), 1.5) /
                       (sigma * sqrt_det);

  if (tau <= 0.0) {
    // The region rho*|t|*tau*j >= 1 is empty: the condition holds vacuously.
    rep.points.push_back({0.0, 0.0, 0.0, 0.0});
    rep.notes.push_back("tau=0: integration region empty, vacuous pass");
    rep.worst_margin = 0.0;
    rep.pass = true;
    return rep;
  }

  const double r0 = 1.0 / (opts.rho * tau * static_cast<double>(j));
  const double wc = pow2d(n_level - 1);  // per-factor power
  const double box = r0 + 12.0 / std::sqrt(wc) + 2.0;
  const double umax = 2.0 * box;  // largest |t_a + t_b| the tables must cover
  const std::size_t axis =
      opts.axis_points ? opts.axis_points | 1 : default_axis_points(j);

  // Admissible h-grid: zero, then fractions of 1/tau along the first axis and
  // the diagonal of R^j.
  std::vector<std::vector<double>> hs;
  hs.push_back(std::vector<double>(j, 0.0));
  for (double f : {0.5 * opts.h_frac_max, opts.h_frac_max}) {
    std::vector<double> h1(j, 0.0);
    h1[0] = f / tau;
    hs.push_back(h1);
    if (j > 1) {
      std::vector<double> hd(j, f / (tau * std::sqrt(static_cast<double>(j))));
      hs.push_back(hd);
    }
  }

  // Per-coordinate tilts after the sum/difference rotation.
  const auto coord_tilts = [&](const std::vector<double>& hvec, unsigned c,
                               double& g_sum, double& g_diff) {
    const double h1 = (c < j) ? hvec[c] : 0.0;
    const double h2 = (c + d < j) ? hvec[c + d] : 0.0;
    g_sum = h1 + h2;
    g_diff = h1 - h2;
  };

  // Cap the grid so every tilt keeps e^{gx}p(x) representable in doubles;
  // p(x) underflows past ~38 coordinate sigmas, so the tilted peak must sit
  // well inside that.
  std::vector<double> sd(d);
  for (unsigned c = 0; c < d; ++c)
    sd[c] = std::sqrt(effective_variance(fam.coords[c]));
  double worst_sigma = 0.0;
  for (const auto& hvec : hs)
    for (unsigned c = 0; c < d; ++c) {
      double gs, gd;
      coord_tilts(hvec, c, gs, gd);
      worst_sigma = std::max(worst_sigma,
                             std::max(std::abs(gs), std::abs(gd)) * sd[c]);
    }
  const double tilt_sigma_cap = 20.0;
  if (worst_sigma > tilt_sigma_cap) {
    const double s = tilt_sigma_cap / worst_sigma;
    for (auto& hvec : hs)
      for (double& v : hvec) v *= s;
    std::ostringstream os;
    os << "tilt grid scaled by " << s
       << ": 1/tau exceeds the representable exponential-tilt range";
    rep.notes.push_back(os.str());
  }

  // Coordinate tables wide enough for every tilt they will carry; the step
  // after decimation must still resolve oscillations at the largest |t|.
  std::vector<GridDensity> tabs;
  tabs.reserve(d);
  for (unsigned c = 0; c < d; ++c) {
    double gmax = 0.0;
    for (const auto& hvec : hs) {
      double gs, gd;
      coord_tilts(hvec, c, gs, gd);
      gmax = std::max(gmax, std::max(std::abs(gs), std::abs(gd)));
    }
    GridDensity p = density_for_tilt(fam.coords[c], gmax, opts.grid);
    const double step_target = kTwoPi / (12.0 * umax);
    std::size_t stride = step_target > p.grid.step()
                             ? static_cast<std::size_t>(step_target /
                                                        p.grid.step())
                             : 1;
    const std::size_t cap = 4097;
    const std::size_t cap_stride = (p.grid.n - 1 + cap - 2) / (cap - 1);
    stride = std::min(stride, cap_stride);
    if (stride > 1) p = decimated_density(p, stride);
    tabs.push_back(std::move(p));
  }

  const std::vector<double> w = simpson_weights(-box, box, axis);
  std::vector<double> nodes(axis);
  for (std::size_t i = 0; i < axis; ++i)
    nodes[i] = -box + (2.0 * box) * static_cast<double>(i) /
                          static_cast<double>(axis - 1);

  rep.pass = true;
  bool first = true;
  for (const auto& hvec : hs) {
    double hnorm = 0.0;
    for (double v : hvec) hnorm += v * v;
    hnorm = std::sqrt(hnorm);

    // Tilt components after the sum/difference rotation, per coordinate.
    std::vector<LogCfTable> tab_sum(d), tab_diff(d);
    for (unsigned c = 0; c < d; ++c) {
      double gs, gd;
      coord_tilts(hvec, c, gs, gd);
      tab_sum[c] = log_cf_table(tabs[c], gs, umax, 2049);
      tab_diff[c] = log_cf_table(tabs[c], gd, umax, 2049);
    }

    // Tensor quadrature with an odometer over the j axes.
    std::vector<std::size_t> idx(j, 0);
    std::vector<double> t(j, 0.0);
    double total = 0.0;
    for (;;) {
      double wprod = 1.0;
      double norm2 = 0.0;
      for (unsigned a = 0; a < j; ++a) {
        t[a] = nodes[idx[a]];
        wprod *= w[idx[a]];
        norm2 += t[a] * t[a];
      }
      if (norm2 >= r0 * r0) {
        double lsum = 0.0;
        for (unsigned c = 0; c < d; ++c) {
          const double a = (c < j) ? t[c] : 0.0;
          const double b = (c + d < j) ? t[c + d] : 0.0;
          if (a == 0.0 && b == 0.0) continue;
          lsum += tab_sum[c].at(a + b) + tab_diff[c].at(a - b);
        }
        const double le = wc * lsum;
        if (le > kLogFloor) total += wprod * std::exp(le);
      }
      unsigned a = 0;
      for (; a < j; ++a) {
        if (++idx[a] < axis) break;
        idx[a] = 0;
      }
      if (a == j) break;
    }

    const double margin = bound - total;
    rep.points.push_back({hnorm, total, bound, margin});
    if (first || margin < rep.worst_margin) rep.worst_margin = margin;
    first = false;
    if (!(total <= bound * (1.0 + 1e-6) + 1e-15)) rep.pass = false;
  }
  return rep;
}

ProbeReport bernstein_probe(const FamilySpec1D& spec, double h, double tau_hat,
                            std::uint64_t reps, std::uint64_t seed,
                            unsigned jobs, std::size_t n_x) {
  if (reps < 100) throw NumericError("bernstein_probe: too few replicates");
  ProbeReport rep;
  {
    std::ostringstream os;
    os << "bernstein(" << family_label(spec) << ",h=" << h << ")";
    rep.name = os.str();
  }

  double mean = 0.0, sigma = 1.0;
  std::optional<FamilySampler> exact;
  std::optional<GridSampler> tilted;
  if (h == 0.0) {
    exact.emplace(spec);
    mean = effective_mean(spec);
    sigma = std::sqrt(effective_variance(spec));
  } else {
    GridDensity p = density_for_tilt(spec, h, GridPolicy{});
    GridDensity pt = tilt(p, h);
    mean = pt.mean();
    sigma = std::sqrt(pt.variance());
    // A tilt past the representable range piles all mass on the last nodes
    // where p underflowed to zero; reject rather than sample a fake delta.
    if (!(sigma > 0.0) || mean - 4.0 * sigma < pt.grid.lo ||
        mean + 4.0 * sigma > pt.grid.hi)
      throw RangeError("bernstein_probe: tilted law leaves the grid",
                       std::abs(mean) + 4.0 * sigma);
    tilted.emplace(pt);
  }
  rep.fitted["sigma"] = sigma;
  rep.fitted["tau"] = tau_hat;
  rep.fitted["mean"] = mean;

  std::vector<double> xs(n_x);
  for (std::size_t i = 0; i < n_x; ++i)
    xs[i] = 4.0 * sigma * static_cast<double>(i) /
            static_cast<double>(n_x - 1);

  const std::uint64_t chunk = 8192;
  const std::size_t n_chunks = static_cast<std::size_t>((reps + chunk - 1) / chunk);
  std::vector<std::vector<std::uint64_t>> counts(
      n_chunks, std::vector<std::uint64_t>(n_x, 0));

  parallel_for(n_chunks, jobs, [&](std::size_t ci) {
    const std::uint64_t lo = static_cast<std::uint64_t>(ci) * chunk;
    const std::uint64_t hi = std::min(reps, lo + chunk);
    auto& cnt = counts[ci];
    for (std::uint64_t r = lo; r < hi; ++r) {
      RngStream g(seed, r);
      const double draw = exact ? exact->draw(g) : tilted->draw(g);
      const double a = std::abs(draw - mean);
      for (std::size_t i = 0; i < n_x; ++i)
        if (a >= xs[i]) ++cnt[i];
    }
  });

  std::vector<std::uint64_t> tot(n_x, 0);
  for (const auto& c : counts)
    for (std::size_t i = 0; i < n_x; ++i) tot[i] += c[i];

  rep.pass = true;
  bool first = true;
  for (std::size_t i = 0; i < n_x; ++i) {
    const double x = xs[i];
    const double emp =
        static_cast<double>(tot[i]) / static_cast<double>(reps);
    double b = std::exp(-x * x / (4.0 * sigma * sigma));
    if (tau_hat > 0.0) b = std::max(b, std::exp(-x / (4.0 * tau_hat)));
    b *= 2.0;
    const double se = std::sqrt(std::max(emp * (1.0 - emp), 0.0) /
                                static_cast<double>(reps));
    const double allowed = b + 3.0 * se;
    const double margin = allowed - emp;
    rep.points.push_back({x, emp, allowed, margin});
    if (first || margin < rep.worst_margin) rep.worst_margin = margin;
    first = false;
    if (emp > allowed) rep.pass = false;
  }
  return rep;
}

ProbeReport ottaviani_probe(const FamilySpec1D& spec, unsigned n,
                            const std::vector<double>& t_grid,
                            std::uint64_t reps, std::uint64_t seed,
                            unsigned jobs) {
  if (n < 1) throw NumericError("ottaviani_probe: n must be positive");
  if (t_grid.empty()) throw NumericError("ottaviani_probe: empty t grid");
  ProbeReport rep;
  {
    std::ostringstream os;
    os << "ottaviani(" << family_label(spec) << ",n=" << n << ")";
    rep.name = os.str();
  }

  const FamilySampler sampler(spec);
  const std::size_t nt = t_grid.size();
  const std::uint64_t chunk = 2048;
  const std::size_t n_chunks = static_cast<std::size_t>((reps + chunk - 1) / chunk);

  // Per chunk: exceedance counts for max_k |S_k| > 3t and per-prefix |S_k| > t.
  struct Counts {
    std::vector<std::uint64_t> left;            // [nt]
    std::vector<std::uint64_t> right;           // [n * nt]
  };
  std::vector<Counts> counts(n_chunks);

  parallel_for(n_chunks, jobs, [&](std::size_t ci) {
    Counts& c = counts[ci];
    c.left.assign(nt, 0);
    c.right.assign(static_cast<std::size_t>(n) * nt, 0);
    const std::uint64_t lo = static_cast<std::uint64_t>(ci) * chunk;
    const std::uint64_t hi = std::min(reps, lo + chunk);
    std::vector<double> absS(n);
    for (std::uint64_t r = lo; r < hi; ++r) {
      RngStream g(seed, r);
      double s = 0.0, mx = 0.0;
      for (unsigned k = 0; k < n; ++k) {
        s += sampler.draw(g);
        absS[k] = std::abs(s);
        mx = std::max(mx, absS[k]);
      }
      for (std::size_t j = 0; j < nt; ++j) {
        if (mx > 3.0 * t_grid[j]) ++c.left[j];
        for (unsigned k = 0; k < n; ++k)
          if (absS[k] > t_grid[j]) ++c.right[static_cast<std::size_t>(k) * nt + j];
      }
    }
  });

  std::vector<std::uint64_t> left(nt, 0);
  std::vector<std::uint64_t> right(static_cast<std::size_t>(n) * nt, 0);
  for (const auto& c : counts) {
    for (std::size_t j = 0; j < nt; ++j) left[j] += c.left[j];
    for (std::size_t i = 0; i < right.size(); ++i) right[i] += c.right[i];
  }

  const double dn = static_cast<double>(reps);
  rep.pass = true;
  bool first = true;
  for (std::size_t j = 0; j < nt; ++j) {
    const double pl = static_cast<double>(left[j]) / dn;
    double pr = 0.0;
    for (unsigned k = 0; k < n; ++k)
      pr = std::max(pr, static_cast<double>(
                            right[static_cast<std::size_t>(k) * nt + j]) /
                            dn);
    const double vl = pl * (1.0 - pl) / dn;
    const double vr = pr * (1.0 - pr) / dn;
    const double slack = 3.0 * std::sqrt(vl + 9.0 * vr);
    const double allowed = 3.0 * pr + slack;
    const double margin = allowed - pl;
    rep.points.push_back({t_grid[j], pl, allowed, margin});
    if (first || margin < rep.worst_margin) rep.worst_margin = margin;
    first = false;
    if (pl > allowed) rep.pass = false;
  }
  return rep;
}

ProbeReport sandwich_probe(const FamilySpec1D& spec, double tau,
                           SandwichOptions opts) {
  if (opts.level < 1 || opts.level > 14)
    throw NumericError("sandwich_probe: bad level");
  ProbeReport rep;
  {
    std::ostringstream os;
    os << "sandwich(" << family_label(spec) << ",n=" << opts.level << ")";
    rep.name = os.str();
  }

  const double sigma = std::sqrt(pow2d(opts.level));
  std::vector<double> s_grid = opts.s_grid;
  if (s_grid.empty()) s_grid = {-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<double> z_grid = opts.z_grid;
  if (z_grid.empty()) {
    for (int i = 0; i < 13; ++i)
      z_grid.push_back(-3.0 + 6.0 * static_cast<double>(i) / 12.0);
  }

  // Child law: (level-1)-fold self-convolution of the summand.
  GridDensity p0 = build_density(spec, opts.grid);
  ConvPolicy cp;
  cp.radius_sigma = opts.grid.radius_sigma;
  cp.radius_pad = std::max(std::abs(p0.grid.lo), p0.grid.hi);
  cp.max_points = opts.grid.max_points;
  const GridDensity child = self_convolve_pow2(p0, opts.level - 1, cp);

  const bool tiny_tau = !(tau > 1e-6);
  double cmax = 0.0;
  std::size_t excluded = 0;
  struct Pt {
    double z, need, den;
  };
  std::vector<Pt> pts;
  for (double su : s_grid) {
    const double s = su * sigma;
    ConditionalOptions co;
    co.n_points = opts.cond_points;
    co.w_lo = -10.0 * sigma;
    co.w_hi = 10.0 * sigma;
    GridCdf F;
    try {
      F = conditional_diff_cdf(child, child, s, co);
    } catch (const ConditioningUnderflow&) {
      excluded += z_grid.size();
      continue;
    }
    for (double zu : z_grid) {
      const double z = zu * sigma;
      const double f = F.value_at(z);
      if (f <= 1e-12 || f >= 1.0 - 1e-12) {
        ++excluded;
        continue;
      }
      const double need = std::abs(z - gaussian_quantile(f, sigma));
      const double den =
          (tiny_tau ? 1.0 : tau) * (1.0 + (z / sigma) * (z / sigma));
      pts.push_back({z, need, den});
      cmax = std::max(cmax, need / den);
    }
  }

  rep.fitted["C"] = cmax;
  rep.fitted["sigma"] = sigma;
  rep.fitted["excluded"] = static_cast<double>(excluded);
  if (tiny_tau)
    rep.notes.push_back("tau ~ 0: C normalized by (1 + z^2/sigma^2) only");
  rep.pass = true;  // exploratory probe: no external bound
  bool first = true;
  for (const auto& q : pts) {
    const double envelope = cmax * q.den;
    const double margin = envelope - q.need;
    rep.points.push_back({q.z, q.need, envelope, margin});
    if (first || margin < rep.worst_margin) rep.worst_margin = margin;
    first = false;
  }
  return rep;
}

}  // namespace kmtc
