#include "kmtc/sampling.hpp"

#include <cmath>

#include "kmtc/errors.hpp"

namespace kmtc {

FamilySampler::FamilySampler(const FamilySpec1D& spec) : spec_(spec) {
  switch (spec_.kind) {
    case FamilyKind::gaussian:
      break;
    case FamilyKind::poly_gaussian:
      if (spec_.d_param != 1)
        throw NumericError("FamilySampler: poly_gaussian needs d_param = 1");
      break;
    case FamilyKind::smoothed_compact:
      if (!spec_.inner) throw NumericError("FamilySampler: missing inner law");
      inner_ = std::make_unique<FamilySampler>(*spec_.inner);
      sb_ = std::sqrt(spec_.b2);
      break;
    case FamilyKind::conv_power: {
      const double w =
          (spec_.base.shape == "samples")
              ? std::max(std::abs(spec_.base.sample_grid.lo),
                         std::abs(spec_.base.sample_grid.hi))
              : spec_.base.half_width;
      base_sampler_ = std::make_unique<GridSampler>(
          build_base_density(spec_.base, w / 8192.0));
      sqrt_m_ = std::sqrt(static_cast<double>(spec_.m));
      break;
    }
  }
}

double FamilySampler::draw(RngStream& g) const {
  double raw = 0.0;
  switch (spec_.kind) {
    case FamilyKind::gaussian:
      raw = std::sqrt(spec_.var) * g.next_gaussian();
      break;
    case FamilyKind::poly_gaussian: {
      const double t2 = spec_.tau * spec_.tau;
      const double u = g.next_uniform();
      if (u < 4.0 / (4.0 + t2)) {
        raw = g.next_gaussian();
      } else {
        const double a = g.next_gaussian();
        const double b = g.next_gaussian();
        const double c = g.next_gaussian();
        const double r = std::sqrt(a * a + b * b + c * c);
        raw = (g.next_uniform() < 0.5) ? -r : r;
      }
      break;
    }
    case FamilyKind::smoothed_compact:
      raw = inner_->draw(g) + sb_ * g.next_gaussian();
      break;
    case FamilyKind::conv_power: {
      double sum = 0.0;
      for (std::uint64_t i = 0; i < spec_.m; ++i) sum += base_sampler_->draw(g);
      raw = sum / sqrt_m_;
      break;
    }
  }
  return spec_.scale * raw + spec_.shift;
}

}  // namespace kmtc
