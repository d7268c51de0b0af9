#include "kmtc/family.hpp"

#include <cmath>
#include <sstream>

#include "kmtc/convolution.hpp"
#include "kmtc/errors.hpp"
#include "kmtc/gaussian.hpp"

namespace kmtc {

namespace {

constexpr double kPi = 3.141592653589793;

double base_support_half_width(const BaseDensity& base) {
  if (base.shape == "samples") {
    return std::max(std::abs(base.sample_grid.lo), std::abs(base.sample_grid.hi));
  }
  return base.half_width;
}

// Support half-width of the compact part of the law (0 for full-support laws);
// used only to pad tabulation ranges.
double support_pad(const FamilySpec1D& spec) {
  switch (spec.kind) {
    case FamilyKind::conv_power:
      return base_support_half_width(spec.base);
    case FamilyKind::smoothed_compact:
      return spec.inner ? support_pad(*spec.inner) * spec.inner->scale : 0.0;
    default:
      return 0.0;
  }
}

// Tabulates the law with the spec's affine applied, on a grid with exactly the
// requested step (symmetric about 0 before the shift relabel). Keeping the
// step exact lets smoothed_compact convolve the parts without resampling.
GridDensity build_effective_at_step(const FamilySpec1D& spec, double step,
                                    const GridPolicy& policy) {
  if (!(spec.scale > 0.0)) throw NumericError("family: scale must be positive");
  const double raw_step = step / spec.scale;
  GridDensity raw;

  auto symmetric_tab = [&](double radius, auto&& pdf) {
    const std::size_t half =
        static_cast<std::size_t>(std::ceil(radius / raw_step));
    GridDensity p;
    p.grid = Grid{-raw_step * static_cast<double>(half),
                  raw_step * static_cast<double>(half), 2 * half + 1};
    p.values.resize(p.grid.n);
    for (std::size_t i = 0; i < p.grid.n; ++i) p.values[i] = pdf(p.grid.x(i));
    normalize_density(p);
    return p;
  };

  switch (spec.kind) {
    case FamilyKind::gaussian: {
      const double sigma = std::sqrt(spec.var);
      raw = symmetric_tab(policy.radius_sigma * sigma,
                          [&](double x) { return gaussian_pdf(x, sigma); });
      break;
    }
    case FamilyKind::poly_gaussian: {
      if (spec.d_param != 1)
        throw NumericError(
            "poly_gaussian: coordinate densities exist for d_param = 1 only");
      const double g = polygauss_gamma(spec.tau, 1);
      raw = symmetric_tab(policy.radius_sigma * g,
                          [&](double x) { return polygauss_pdf1(spec.tau, x); });
      break;
    }
    case FamilyKind::conv_power: {
      const double sm = std::sqrt(static_cast<double>(spec.m));
      GridDensity base = build_base_density(spec.base, raw_step * sm);
      ConvPolicy cp;
      cp.radius_sigma = policy.radius_sigma;
      cp.radius_pad = base_support_half_width(spec.base);
      cp.max_points = policy.max_points;
      GridDensity powed = convolve_power(base, spec.m, cp);
      raw = scaled_density(powed, 1.0 / sm);
      break;
    }
    case FamilyKind::smoothed_compact: {
      if (!spec.inner) throw NumericError("smoothed_compact: missing inner law");
      if (!(spec.b2 > 0.0)) throw NumericError("smoothed_compact: b2 must be > 0");
      GridDensity inner = build_effective_at_step(*spec.inner, raw_step, policy);
      const double sb = std::sqrt(spec.b2);
      const std::size_t half = static_cast<std::size_t>(
          std::ceil(policy.radius_sigma * sb / raw_step));
      Grid gg{-raw_step * static_cast<double>(half),
              raw_step * static_cast<double>(half), 2 * half + 1};
      raw = convolve(inner, gaussian_density_on(gg, sb), ConvPolicy{});
      break;
    }
  }

  GridDensity out = scaled_density(raw, spec.scale);
  out.grid.lo += spec.shift;
  out.grid.hi += spec.shift;
  normalize_density(out);
  return out;
}

}  // namespace

double polygauss_gamma(double tau, int d) {
  const double t2 = tau * tau;
  const double dd = static_cast<double>(d);
  return std::sqrt((4.0 + t2 * (dd + 2.0)) / (4.0 + t2 * dd));
}

double polygauss_pdf1(double tau, double x) {
  const double t2 = tau * tau;
  return (4.0 + t2 * x * x) * gaussian_pdf(x) / (4.0 + t2);
}

double polygauss_cdf1(double tau, double x) {
  const double t2 = tau * tau;
  return gaussian_cdf(x) - t2 * x * gaussian_pdf(x) / (4.0 + t2);
}

double polygauss_pdf(double tau, int d, double r) {
  const double t2 = tau * tau;
  const double dd = static_cast<double>(d);
  const double norm =
      std::pow(2.0 * 3.14159265358979323846, 0.5 * dd) * (4.0 + t2 * dd);
  return (4.0 + t2 * r * r) * std::exp(-0.5 * r * r) / norm;
}

GridDensity build_base_density(const BaseDensity& base, double step) {
  GridDensity p;
  if (base.shape == "samples") {
    if (base.samples.size() < 3 || !base.sample_grid.valid() ||
        base.sample_grid.n != base.samples.size())
      throw NumericError("base density: bad sample table");
    // Resample onto the requested step so downstream convolutions line up.
    GridDensity src;
    src.grid = base.sample_grid;
    src.values = base.samples;
    const double w =
        std::max(std::abs(base.sample_grid.lo), std::abs(base.sample_grid.hi));
    const std::size_t half = static_cast<std::size_t>(std::ceil(w / step));
    p.grid = Grid{-step * static_cast<double>(half),
                  step * static_cast<double>(half), 2 * half + 1};
    p.values.resize(p.grid.n);
    for (std::size_t i = 0; i < p.grid.n; ++i)
      p.values[i] = std::max(0.0, src.value_at(p.grid.x(i)));
    normalize_density(p);
    return p;
  }
  const double w = base.half_width;
  if (!(w > 0.0)) throw NumericError("base density: half_width must be > 0");
  std::size_t half = static_cast<std::size_t>(std::ceil(w / step));
  if (half < 8) half = 8;
  p.grid = Grid{-step * static_cast<double>(half),
                step * static_cast<double>(half), 2 * half + 1};
  p.values.resize(p.grid.n);
  for (std::size_t i = 0; i < p.grid.n; ++i) {
    const double x = p.grid.x(i);
    if (std::abs(x) >= w) {
      p.values[i] = 0.0;
    } else if (base.shape == "raised_cosine") {
      p.values[i] = (1.0 + std::cos(kPi * x / w)) / (2.0 * w);
    } else if (base.shape == "triangle") {
      p.values[i] = (1.0 - std::abs(x) / w) / w;
    } else {
      throw NumericError("base density: unknown shape '" + base.shape + "'");
    }
  }
  normalize_density(p);
  return p;
}

double family_variance(const FamilySpec1D& spec) {
  switch (spec.kind) {
    case FamilyKind::gaussian:
      return spec.var;
    case FamilyKind::poly_gaussian: {
      const double g = polygauss_gamma(spec.tau, spec.d_param);
      return g * g;
    }
    case FamilyKind::smoothed_compact: {
      if (!spec.inner) throw NumericError("smoothed_compact: missing inner law");
      return effective_variance(*spec.inner) + spec.b2;
    }
    case FamilyKind::conv_power: {
      // (sum of m base draws) / sqrt(m): per-draw variance survives.
      GridDensity base = build_base_density(
          spec.base, base_support_half_width(spec.base) / 4096.0);
      return base.variance();
    }
  }
  throw NumericError("family_variance: unreachable");
}

double family_mean(const FamilySpec1D& spec) {
  switch (spec.kind) {
    case FamilyKind::gaussian:
    case FamilyKind::poly_gaussian:
      return 0.0;
    case FamilyKind::smoothed_compact:
      return spec.inner ? effective_mean(*spec.inner) : 0.0;
    case FamilyKind::conv_power: {
      GridDensity base = build_base_density(
          spec.base, base_support_half_width(spec.base) / 4096.0);
      return std::sqrt(static_cast<double>(spec.m)) * base.mean();
    }
  }
  throw NumericError("family_mean: unreachable");
}

double effective_variance(const FamilySpec1D& spec) {
  return family_variance(spec) * spec.scale * spec.scale;
}

double effective_mean(const FamilySpec1D& spec) {
  return family_mean(spec) * spec.scale + spec.shift;
}

FamilySpec1D standardize(FamilySpec1D spec) {
  spec.scale = 1.0;
  spec.shift = 0.0;
  const double v = family_variance(spec);
  if (!(v > 0.0)) throw NumericError("standardize: non-positive variance");
  spec.scale = 1.0 / std::sqrt(v);
  spec.shift = -family_mean(spec) * spec.scale;
  if (spec.shift == 0.0) spec.shift = 0.0;  // drop negative zero
  return spec;
}

GridDensity build_density(const FamilySpec1D& spec, const GridPolicy& policy) {
  const double sigma = std::sqrt(effective_variance(spec));
  const double pad = support_pad(spec) * spec.scale;
  const double radius =
      policy.radius_sigma * sigma + pad + std::abs(spec.shift);
  const double step =
      2.0 * radius / static_cast<double>(policy.n_points - 1);
  return build_effective_at_step(spec, step, policy);
}

bool family_cdf_closed_form(const FamilySpec1D& spec, double x, double& out) {
  const double raw = (x - spec.shift) / spec.scale;
  switch (spec.kind) {
    case FamilyKind::gaussian:
      out = gaussian_cdf(raw, std::sqrt(spec.var));
      return true;
    case FamilyKind::poly_gaussian:
      if (spec.d_param != 1) return false;
      out = polygauss_cdf1(spec.tau, raw);
      return true;
    default:
      return false;
  }
}

ProductFamily replicate(const FamilySpec1D& spec, unsigned d) {
  ProductFamily f;
  f.coords.assign(d, spec);
  return f;
}

std::string family_label(const FamilySpec1D& spec) {
  std::ostringstream os;
  switch (spec.kind) {
    case FamilyKind::gaussian:
      os << "gaussian(var=" << spec.var << ")";
      break;
    case FamilyKind::poly_gaussian:
      os << "poly_gaussian(tau=" << spec.tau << ",d=" << spec.d_param << ")";
      break;
    case FamilyKind::smoothed_compact:
      os << "smoothed_compact(b2=" << spec.b2 << ",inner="
         << (spec.inner ? family_label(*spec.inner) : std::string("none"))
         << ")";
      break;
    case FamilyKind::conv_power:
      os << "conv_power(shape=" << spec.base.shape << ",w="
         << spec.base.half_width << ",m=" << spec.m << ")";
      break;
  }
  if (spec.scale != 1.0 || spec.shift != 0.0)
    os << "@(scale=" << spec.scale << ",shift=" << spec.shift << ")";
  return os.str();
}

}  // namespace kmtc
