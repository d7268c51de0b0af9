#include "kmtc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kmtc/conditional.hpp"
#include "kmtc/convolution.hpp"
#include "kmtc/errors.hpp"
#include "kmtc/gaussian.hpp"

namespace kmtc {

namespace {

bool base_equal(const BaseDensity& a, const BaseDensity& b) {
  return a.shape == b.shape && a.half_width == b.half_width &&
         a.sample_grid.lo == b.sample_grid.lo &&
         a.sample_grid.hi == b.sample_grid.hi &&
         a.sample_grid.n == b.sample_grid.n && a.samples == b.samples;
}

bool spec_equal(const FamilySpec1D& a, const FamilySpec1D& b) {
  if (a.kind != b.kind || a.scale != b.scale || a.shift != b.shift)
    return false;
  switch (a.kind) {
    case FamilyKind::gaussian:
      return a.var == b.var;
    case FamilyKind::poly_gaussian:
      return a.tau == b.tau && a.d_param == b.d_param;
    case FamilyKind::smoothed_compact:
      if (a.b2 != b.b2) return false;
      if (!a.inner || !b.inner) return a.inner == b.inner;
      return spec_equal(*a.inner, *b.inner);
    case FamilyKind::conv_power:
      return a.m == b.m && base_equal(a.base, b.base);
  }
  return false;
}

double pow2d(unsigned n) { return static_cast<double>(std::uint64_t{1} << n); }

}  // namespace

CouplingEngine::CouplingEngine(EngineConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.N < 1 || cfg_.N > 14)
    throw NumericError("CouplingEngine: N must be in [1, 14]");
  if (cfg_.d < 1 || cfg_.d > 8)
    throw NumericError("CouplingEngine: d must be in [1, 8]");
  if (cfg_.family.d() != cfg_.d)
    throw NumericError("CouplingEngine: family dimension mismatch");
  if (cfg_.conditional_points < 16)
    throw NumericError("CouplingEngine: conditional_points too small");
  if (cfg_.target_count > count())
    throw NumericError("CouplingEngine: target_count exceeds 2^N");
  if (cfg_.target_count == count()) cfg_.target_count = 0;

  const unsigned N = cfg_.N;
  const std::uint64_t T = target_count();

  coord_index_.resize(cfg_.d);
  for (unsigned c = 0; c < cfg_.d; ++c) {
    const FamilySpec1D& spec = cfg_.family.coords[c];
    if (std::abs(effective_variance(spec) - 1.0) > 1e-6 ||
        std::abs(effective_mean(spec)) > 1e-8)
      throw NumericError("CouplingEngine: coordinates must be standardized");

    bool found = false;
    for (unsigned prev = 0; prev < c; ++prev) {
      if (spec_equal(cfg_.family.coords[prev], spec)) {
        coord_index_[c] = coord_index_[prev];
        found = true;
        break;
      }
    }
    if (found) continue;

    CoordCache cc;
    const bool analytic =
        spec.kind == FamilyKind::gaussian ||
        (spec.kind == FamilyKind::poly_gaussian && spec.tau == 0.0);
    cc.pure_gaussian = analytic;
    cc.pure.resize(N + 1);
    if (analytic) {
      for (unsigned j = 0; j <= N; ++j)
        cc.pure[j] = LevelLaw{true, pow2d(j), {}};
    } else {
      GridDensity base = build_density(spec, cfg_.grid);
      const double base_radius =
          std::max(std::abs(base.grid.lo), base.grid.hi);
      ConvPolicy cp;
      cp.radius_sigma = cfg_.grid.radius_sigma;
      cp.radius_pad = base_radius;
      cp.max_points = cfg_.grid.max_points;
      cc.pure[0] = LevelLaw{false, 1.0, std::move(base)};
      for (unsigned j = 1; j <= N; ++j) {
        cc.pure[j] =
            LevelLaw{false, pow2d(j),
                     convolve(cc.pure[j - 1].density, cc.pure[j - 1].density, cp)};
      }
      if (T == count()) {
        cc.top_cdf = cdf_of(cc.pure[N].density);
      } else {
        // Padded run: tabulate the Gaussian sibling laws and the mixed block
        // laws target^(*a) * N(0, 2^n - a) along the straddling path.
        cc.gauss_tab.resize(N + 1);
        for (unsigned j = 0; j < N; ++j) {
          const double sd = std::sqrt(pow2d(j));
          const double radius = cfg_.grid.radius_sigma * sd;
          const double h = cc.pure[0].density.grid.step();
          const std::size_t half =
              static_cast<std::size_t>(std::ceil(radius / h));
          Grid gg{-h * static_cast<double>(half),
                  h * static_cast<double>(half), 2 * half + 1};
          cc.gauss_tab[j] = gaussian_density_on(gg, sd);
        }
        ConvPolicy cp_flat = cp;
        cp_flat.max_points = 0;  // keep one step so partial powers combine
        for (unsigned n = N; n >= 1; --n) {
          const std::uint64_t len = std::uint64_t{1} << n;
          const std::uint64_t a = T % len;
          if (a == 0) break;  // blocks align below this level
          GridDensity part =
              convolve_power(cc.pure[0].density, a, cp_flat);
          if (len - a > 0) {
            const double sd = std::sqrt(static_cast<double>(len - a));
            const double h = part.grid.step();
            const std::size_t half = static_cast<std::size_t>(
                std::ceil(cfg_.grid.radius_sigma * sd / h));
            Grid gg{-h * static_cast<double>(half),
                    h * static_cast<double>(half), 2 * half + 1};
            part = convolve(part, gaussian_density_on(gg, sd), cp_flat);
          }
          cc.mixed.emplace(std::make_pair(n, a),
                           LevelLaw{false, pow2d(n), std::move(part)});
        }
        cc.top_cdf = cdf_of(cc.mixed.at({N, T}).density);
      }
    }
    coord_index_[c] = coord_.size();
    coord_.push_back(std::move(cc));
  }

  gauss_analytic_.resize(N + 1);
  for (unsigned j = 0; j <= N; ++j)
    gauss_analytic_[j] = LevelLaw{true, pow2d(j), {}};
}

const LevelLaw& CouplingEngine::block_law(unsigned c, unsigned n,
                                          std::uint64_t k) const {
  const CoordCache& cc = coord_[coord_index_[c]];
  if (cc.pure_gaussian) return cc.pure[n];
  const std::uint64_t len = std::uint64_t{1} << n;
  const std::uint64_t lo = k * len;
  const std::uint64_t T = target_count();
  if (T >= lo + len) return cc.pure[n];
  if (T <= lo) return gauss_analytic_[n];
  return cc.mixed.at({n, T - lo});
}

const GridDensity& CouplingEngine::table_of(const LevelLaw& law, unsigned c,
                                            unsigned level) const {
  if (!law.gaussian) return law.density;
  const CoordCache& cc = coord_[coord_index_[c]];
  if (level >= cc.gauss_tab.size() || !cc.gauss_tab[level])
    throw NumericError("CouplingEngine: missing Gaussian sibling table");
  return *cc.gauss_tab[level];
}

GaussianTree CouplingEngine::draw_gaussian_side(RngStream& g) const {
  GaussianTree t;
  t.N = cfg_.N;
  t.d = cfg_.d;
  t.level.resize(cfg_.N + 1);
  const std::uint64_t n0 = count() * cfg_.d;
  t.level[0].resize(n0);
  for (std::uint64_t i = 0; i < n0; ++i) t.level[0][i] = g.next_gaussian();
  for (unsigned n = 1; n <= cfg_.N; ++n) {
    const std::uint64_t blocks = count() >> n;
    t.level[n].resize(blocks * cfg_.d);
    for (std::uint64_t k = 0; k < blocks; ++k) {
      for (unsigned c = 0; c < cfg_.d; ++c) {
        t.level[n][k * cfg_.d + c] =
            t.level[n - 1][2 * k * cfg_.d + c] +
            t.level[n - 1][(2 * k + 1) * cfg_.d + c];
      }
    }
  }
  return t;
}

Workspace CouplingEngine::make_workspace() const {
  Workspace ws;
  ws.u.resize(cfg_.N + 1);
  ws.v.resize(cfg_.N + 1);
  for (unsigned n = 0; n <= cfg_.N; ++n) {
    const std::uint64_t sz = (count() >> n) * cfg_.d;
    ws.u[n].resize(sz);
    ws.v[n].resize(sz);
  }
  ws.cond.resize(cfg_.conditional_points);
  ws.carry.resize(cfg_.d);
  return ws;
}

double CouplingEngine::gaussian_pair_value(double mu, double sd, double vtilde,
                                           double sigma_v) const {
  const double q = gaussian_tail(std::abs(vtilde), sigma_v);
  double z = gaussian_tail_quantile(q, 1.0);
  if (vtilde < 0.0) z = -z;
  return mu + sd * z;
}

double CouplingEngine::top_value(unsigned c, double v) const {
  const LevelLaw& law = block_law(c, cfg_.N, 0);
  const double sigma_v = std::sqrt(pow2d(cfg_.N));
  if (law.gaussian)
    return gaussian_pair_value(0.0, std::sqrt(law.var), v, sigma_v);
  const CoordCache& cc = coord_[coord_index_[c]];
  return cc.top_cdf.invert(gaussian_cdf(v, sigma_v));
}

double CouplingEngine::level_value(unsigned c, unsigned n, std::uint64_t k,
                                   double s, double vtilde,
                                   std::uint64_t* underflows) const {
  const LevelLaw& la = block_law(c, n - 1, 2 * k);
  const LevelLaw& lb = block_law(c, n - 1, 2 * k + 1);
  const double sigma_v = std::sqrt(pow2d(n));
  const double vsum = la.var + lb.var;
  const double mu = s * (la.var - lb.var) / vsum;
  const double sd = 2.0 * std::sqrt(la.var * lb.var / vsum);
  if (la.gaussian && lb.gaussian)
    return gaussian_pair_value(mu, sd, vtilde, sigma_v);

  const GridDensity& pl = table_of(la, c, n - 1);
  const GridDensity& pr = table_of(lb, c, n - 1);
  ConditionalOptions opts;
  opts.n_points = cfg_.conditional_points;
  opts.w_lo = mu - 10.0 * sd;
  opts.w_hi = mu + 10.0 * sd;
  try {
    const GridCdf cdf = conditional_diff_cdf(pl, pr, s, opts);
    return cdf.invert(gaussian_cdf(vtilde, sigma_v));
  } catch (const ConditioningUnderflow&) {
    if (underflows) ++*underflows;
    return gaussian_pair_value(mu, sd, vtilde, sigma_v);
  }
}

double CouplingEngine::level_value_ws(unsigned c, unsigned n, std::uint64_t k,
                                      double s, double vtilde,
                                      std::vector<double>& cond,
                                      std::uint64_t* underflows) const {
  const LevelLaw& la = block_law(c, n - 1, 2 * k);
  const LevelLaw& lb = block_law(c, n - 1, 2 * k + 1);
  const double sigma_v = std::sqrt(pow2d(n));
  const double vsum = la.var + lb.var;
  const double mu = s * (la.var - lb.var) / vsum;
  const double sd = 2.0 * std::sqrt(la.var * lb.var / vsum);
  if (la.gaussian && lb.gaussian)
    return gaussian_pair_value(mu, sd, vtilde, sigma_v);

  const GridDensity& pl = table_of(la, c, n - 1);
  const GridDensity& pr = table_of(lb, c, n - 1);
  double lo = std::max(2.0 * pl.grid.lo - s, s - 2.0 * pr.grid.hi);
  double hi = std::min(2.0 * pl.grid.hi - s, s - 2.0 * pr.grid.lo);
  lo = std::max(lo, mu - 10.0 * sd);
  hi = std::min(hi, mu + 10.0 * sd);

  const std::size_t nc = cond.size();
  double mass = 0.0;
  if (hi > lo) {
    const double h = (hi - lo) / static_cast<double>(nc - 1);
    for (std::size_t i = 0; i < nc; ++i) {
      const double w = lo + h * static_cast<double>(i);
      cond[i] = pl.value_at((s + w) / 2.0) * pr.value_at((s - w) / 2.0);
    }
    for (std::size_t i = 1; i < nc; ++i)
      mass += 0.5 * h * (cond[i - 1] + cond[i]);
  }
  if (!(mass > kConditioningUnderflowFloor)) {
    if (underflows) ++*underflows;
    return gaussian_pair_value(mu, sd, vtilde, sigma_v);
  }

  const double u = gaussian_cdf(vtilde, sigma_v);
  const double target = u * mass;
  if (target <= 0.0) return lo;
  const double h = (hi - lo) / static_cast<double>(nc - 1);
  double acc = 0.0;
  for (std::size_t i = 1; i < nc; ++i) {
    const double cell = 0.5 * h * (cond[i - 1] + cond[i]);
    if (acc + cell >= target) {
      if (cell <= 0.0) return lo + h * static_cast<double>(i);
      return lo + h * (static_cast<double>(i - 1) + (target - acc) / cell);
    }
    acc += cell;
  }
  return hi;
}

void CouplingEngine::run(RngStream& g, Workspace& ws, CouplingOutput& out,
                         bool keep_paths) const {
  const unsigned N = cfg_.N;
  const unsigned d = cfg_.d;
  const std::uint64_t n0 = count();

  out.N = N;
  out.d = d;
  out.underflow_count = 0;

  // Gaussian side, bottom-up.
  for (std::uint64_t i = 0; i < n0 * d; ++i) ws.v[0][i] = g.next_gaussian();
  for (unsigned n = 1; n <= N; ++n) {
    const std::uint64_t blocks = n0 >> n;
    for (std::uint64_t k = 0; k < blocks; ++k) {
      for (unsigned c = 0; c < d; ++c) {
        ws.v[n][k * d + c] = ws.v[n - 1][2 * k * d + c] +
                             ws.v[n - 1][(2 * k + 1) * d + c];
      }
    }
  }

  // Top block through the target quantile function.
  for (unsigned c = 0; c < d; ++c) ws.u[N][c] = top_value(c, ws.v[N][c]);

  // Walk levels top-down, drawing each half-block difference conditionally.
  for (unsigned n = N; n >= 1; --n) {
    const std::uint64_t blocks = n0 >> n;
    for (std::uint64_t k = 0; k < blocks; ++k) {
      for (unsigned c = 0; c < d; ++c) {
        const double s = ws.u[n][k * d + c];
        const double vt = ws.v[n - 1][2 * k * d + c] -
                          ws.v[n - 1][(2 * k + 1) * d + c];
        const double w =
            level_value_ws(c, n, k, s, vt, ws.cond, &out.underflow_count);
        ws.u[n - 1][2 * k * d + c] = 0.5 * (s + w);
        ws.u[n - 1][(2 * k + 1) * d + c] = 0.5 * (s - w);
      }
    }
  }

  // Discrepancy path on per-summand differences (numerically benign).
  std::fill(ws.carry.begin(), ws.carry.end(), 0.0);
  if (keep_paths) {
    out.x.assign(ws.u[0].begin(), ws.u[0].end());
    out.y.assign(ws.v[0].begin(), ws.v[0].end());
    out.disc.resize(n0);
  } else {
    out.x.clear();
    out.y.clear();
    out.disc.clear();
  }
  double delta = 0.0;
  for (std::uint64_t i = 0; i < n0; ++i) {
    double m = 0.0;
    for (unsigned c = 0; c < d; ++c) {
      ws.carry[c] += ws.u[0][i * d + c] - ws.v[0][i * d + c];
      m = std::max(m, std::abs(ws.carry[c]));
    }
    if (keep_paths) out.disc[i] = m;
    delta = std::max(delta, m);
  }
  out.delta = delta;
}

CouplingOutput CouplingEngine::run_replicate(std::uint64_t seed,
                                             std::uint64_t replicate,
                                             bool keep_paths) const {
  RngStream g(seed, replicate);
  Workspace ws = make_workspace();
  CouplingOutput out;
  run(g, ws, out, keep_paths);
  return out;
}

}  // namespace kmtc
