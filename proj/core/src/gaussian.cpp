#include "kmtc/gaussian.hpp"

#include <cmath>

namespace kmtc {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
// Saturation point: erfc underflows around x ~ 38.6.
constexpr double kSaturate = 39.0;

// Standard-normal upper-tail quantile for q in (0, 1/2]. Initial guess from
// the classic sqrt(-2 log q) rational expansion, then Newton on the erfc-based
// tail; two steps reach full double precision from that start.
double std_tail_quantile(double q) {
  if (q >= 0.5) return 0.0;
  const double t = std::sqrt(-2.0 * std::log(q));
  double x = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
  if (q < 1e-280) {
    // pdf underflows here; iterate on the log tail with the asymptotic
    // series log Q(x) = -x^2/2 - log(x sqrt(2 pi)) + log(1 - 1/x^2 + 3/x^4
    // - 15/x^6 + ...); the dropped term shifts x by O(x^-9).
    const double lq = std::log(q);
    for (int i = 0; i < 4; ++i) {
      const double x2 = x * x;
      const double corr =
          std::log1p((-1.0 + (3.0 - 15.0 / x2) / x2) / x2);
      const double g = -0.5 * x2 - std::log(x / kInvSqrt2Pi) + corr - lq;
      x += g / (x + 1.0 / x);
    }
    return x;
  }
  for (int i = 0; i < 3; ++i) {
    const double tail = 0.5 * std::erfc(x / kSqrt2);
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    x += (tail - q) / pdf;
  }
  return x;
}

}  // namespace

double gaussian_pdf(double x, double sigma) {
  const double z = x / sigma;
  return kInvSqrt2Pi / sigma * std::exp(-0.5 * z * z);
}

double gaussian_cdf(double x, double sigma) {
  return 0.5 * std::erfc(-x / (sigma * kSqrt2));
}

double gaussian_tail(double x, double sigma) {
  return 0.5 * std::erfc(x / (sigma * kSqrt2));
}

double gaussian_quantile(double u, double sigma) {
  if (!(u > 0.0)) return -kSaturate * sigma;
  if (!(u < 1.0)) return kSaturate * sigma;
  if (u <= 0.5) return -sigma * std_tail_quantile(u);
  return sigma * std_tail_quantile(1.0 - u);
}

double gaussian_tail_quantile(double q, double sigma) {
  if (!(q > 0.0)) return kSaturate * sigma;
  if (!(q < 1.0)) return -kSaturate * sigma;
  if (q <= 0.5) return sigma * std_tail_quantile(q);
  return -sigma * std_tail_quantile(1.0 - q);
}

}  // namespace kmtc
