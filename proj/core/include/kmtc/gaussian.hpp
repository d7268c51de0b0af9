#pragma once

namespace kmtc {

double gaussian_pdf(double x, double sigma = 1.0);

// Phi_sigma(x); saturates to {0, 1} in the extreme tails.
double gaussian_cdf(double x, double sigma = 1.0);

// Upper tail 1 - Phi_sigma(x) at full relative precision (erfc-based). This is
// the channel to use when composing cdf with quantile: a plain double u loses
// the tail beyond ~5 sigma because of spacing near 1.
double gaussian_tail(double x, double sigma = 1.0);

// Inverse of gaussian_cdf. For u > 1/2 the achievable accuracy is limited by
// the representation of 1 - u in the input itself.
double gaussian_quantile(double u, double sigma = 1.0);

// x such that gaussian_tail(x, sigma) = q; full relative precision in q.
double gaussian_tail_quantile(double q, double sigma = 1.0);

}  // namespace kmtc
