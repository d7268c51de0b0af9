#include <doctest.h>

#include <cmath>
#include <vector>

#include "kmtc/convolution.hpp"
#include "kmtc/diagnostics.hpp"
#include "kmtc/errors.hpp"
#include "kmtc/family.hpp"
#include "kmtc/grid.hpp"

using namespace kmtc;

namespace {

FamilySpec1D std_poly(double tau) {
  FamilySpec1D s;
  s.kind = FamilyKind::poly_gaussian;
  s.tau = tau;
  return standardize(s);
}

FamilySpec1D std_gauss() {
  FamilySpec1D s;
  s.kind = FamilyKind::gaussian;
  return standardize(s);
}

// Closed-form cumulant function of the standardized polynomial-Gaussian law:
// K(z) = K_raw(z / gamma) with K_raw(z) = z^2/2 + log(4 + tau^2 (1+z^2))
// - log(4 + tau^2).
double poly_cumulant(double tau, double z) {
  const double g = polygauss_gamma(tau, 1);
  const double zr = z / g;
  const double t2 = tau * tau;
  return 0.5 * zr * zr + std::log(4.0 + t2 * (1.0 + zr * zr)) -
         std::log(4.0 + t2);
}

// Modulus of the tilted characteristic function of the raw law:
// |E e^{(h+it) X}| / E e^{h X}.
double poly_cf_oracle(double tau, double h, double t) {
  const double t2 = tau * tau;
  const double a = 4.0 + t2 * (1.0 + h * h - t * t);
  const double b = 2.0 * t2 * h * t;
  return std::sqrt(a * a + b * b) * std::exp(-0.5 * t * t) /
         (4.0 + t2 * (1.0 + h * h));
}

}  // namespace

TEST_CASE("class estimate is near zero for a gaussian") {
  ClassReport rep = estimate_tau(std_gauss());
  CHECK(rep.tau_hat <= 1e-6);
  CHECK(rep.var_normalizer == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("class estimate matches the closed-form stencil") {
  double prev = 0.0;
  for (double tau : {0.3, 0.5, 1.0}) {
    ClassReport rep = estimate_tau(std_poly(tau));
    REQUIRE(rep.z_radius_used > 0.5);
    REQUIRE_FALSE(rep.witnesses.empty());

    // Re-run the identical finite-difference recipe on the closed form.
    const double h = 1e-2;
    auto K = [&](double z) { return poly_cumulant(tau, z); };
    const double var0 = (-K(2 * h) + 16.0 * K(h) + 16.0 * K(-h) - K(-2 * h)) /
                        (12.0 * h * h);
    double mx = 0.0;
    const std::size_t nz = 41;
    const double zr = rep.z_radius_used;
    for (std::size_t i = 0; i < nz; ++i) {
      const double z =
          -zr + 2.0 * zr * static_cast<double>(i) / static_cast<double>(nz - 1);
      const double third = (K(z + 2 * h) - 2.0 * K(z + h) + 2.0 * K(z - h) -
                            K(z - 2 * h)) /
                           (2.0 * h * h * h);
      mx = std::max(mx, std::abs(third));
    }
    const double oracle = mx / var0;
    CHECK(rep.tau_hat == doctest::Approx(oracle).epsilon(1e-4));
    // Cubic smallness in tau, and monotone growth.
    CHECK(rep.tau_hat <= tau * tau * tau);
    CHECK(rep.tau_hat > prev);
    prev = rep.tau_hat;
  }
}

TEST_CASE("tilted characteristic modulus against closed forms") {
  // Raw (unstandardized) tables so frequencies line up with the formulas.
  FamilySpec1D graw;
  graw.kind = FamilyKind::gaussian;
  GridDensity gt = build_density(graw);
  for (double t : {0.0, 0.5, 1.5, 3.0})
    CHECK(cf_abs(gt, 0.0, t) ==
          doctest::Approx(std::exp(-0.5 * t * t)).scale(1.0).epsilon(1e-7));

  for (double tau : {0.3, 1.0}) {
    FamilySpec1D praw;
    praw.kind = FamilyKind::poly_gaussian;
    praw.tau = tau;
    GridDensity pt = build_density(praw);
    CHECK(cf_abs(pt, 0.0, 0.0) == 1.0);
    CHECK(cf_abs(pt, 1.0, 0.0) == 1.0);
    for (double h : {0.0, 0.5, 1.0})
      for (double t : {0.5, 1.0, 3.0, 6.0}) {
        const double got = cf_abs(pt, h, t);
        CHECK(std::abs(got - poly_cf_oracle(tau, h, t)) <= 1e-9);
        CHECK(got <= 1.0);
      }
    // Batched evaluation agrees with the scalar route.
    const std::vector<double> ts = {-2.0, -0.5, 0.0, 0.7, 2.2};
    const std::vector<double> batch = cf_abs_table(pt, 0.5, ts);
    REQUIRE(batch.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
      CHECK(batch[i] == doctest::Approx(cf_abs(pt, 0.5, ts[i]))
                            .scale(1.0)
                            .epsilon(1e-12));
  }
}

TEST_CASE("block characteristic modulus is the single-law power") {
  GridDensity p = build_density(std_poly(0.5));
  GridDensity p8 = convolve_power(p, 8);
  for (double t : {0.2, 0.5, 0.8}) {
    const double lhs = std::log(cf_abs(p8, 0.0, t));
    const double rhs = 8.0 * std::log(cf_abs(p, 0.0, t));
    CHECK(lhs == doctest::Approx(rhs).scale(1.0).epsilon(1e-9));
  }
}

TEST_CASE("smoothness integral condition, vacuous and honest cases") {
  ProductFamily gauss2 = replicate(std_gauss(), 2);

  // tau = 0: empty integration region.
  ProbeReport vac = check_smoothness_integrals(gauss2, 0.0, 2, 1);
  CHECK(vac.pass);
  REQUIRE_FALSE(vac.notes.empty());

  // Estimated class parameter of the family itself: comfortably inside.
  ProductFamily poly1 = replicate(std_poly(0.3), 1);
  const double tau_hat = estimate_tau(poly1.coords[0]).tau_hat;
  ProbeReport ok = check_smoothness_integrals(poly1, std::sqrt(2.0) * tau_hat, 1, 1);
  CHECK(ok.pass);
  CHECK(ok.worst_margin > 0.0);

  // A forced large parameter at a shallow level violates the bound honestly,
  // and deepening the level restores it; the probe reports, never throws.
  ProbeReport shallow = check_smoothness_integrals(gauss2, 0.3, 2, 2);
  CHECK_FALSE(shallow.pass);
  CHECK(shallow.worst_margin < 0.0);
  ProbeReport deep = check_smoothness_integrals(gauss2, 0.3, 5, 2);
  CHECK(deep.pass);
  CHECK(deep.worst_margin > 0.0);

  // Argument validation.
  CHECK_THROWS_AS(check_smoothness_integrals(gauss2, 0.3, 2, 0), NumericError);
  CHECK_THROWS_AS(check_smoothness_integrals(gauss2, 0.3, 2, 5), NumericError);
  CHECK_THROWS_AS(check_smoothness_integrals(gauss2, 0.3, 0, 1), NumericError);
}

TEST_CASE("two-regime tail probe") {
  FamilySpec1D spec = std_poly(0.5);
  const double tau_hat = estimate_tau(spec).tau_hat;
  ProbeReport flat = bernstein_probe(spec, 0.0, tau_hat, 20000, 9);
  CHECK(flat.pass);
  CHECK(flat.worst_margin > 0.0);
  REQUIRE(flat.points.size() == 17);
  for (const ProbePoint& pt : flat.points) {
    CHECK(pt.margin == doctest::Approx(pt.bound - pt.empirical)
                           .scale(1.0)
                           .epsilon(1e-12));
    CHECK(pt.empirical >= 0.0);
    CHECK(pt.empirical <= 1.0);
  }
  // The same law under a moderate exponential tilt.
  ProbeReport tilted = bernstein_probe(spec, 2.0, tau_hat, 20000, 9);
  CHECK(tilted.pass);

  CHECK_THROWS_AS(bernstein_probe(spec, 0.0, tau_hat, 50, 9), NumericError);
}

TEST_CASE("maximal inequality probe") {
  FamilySpec1D spec = std_poly(0.5);
  const std::vector<double> ts = {0.5, 1.0, 2.0, 4.0, 8.0};
  ProbeReport rep = ottaviani_probe(spec, 16, ts, 20000, 11);
  CHECK(rep.pass);
  CHECK(rep.worst_margin > 0.0);
  REQUIRE(rep.points.size() == ts.size());

  // One summand: the maximum is the sum itself, so the bound is slack.
  ProbeReport one = ottaviani_probe(spec, 1, {0.5, 1.0}, 5000, 12);
  CHECK(one.pass);

  CHECK_THROWS_AS(ottaviani_probe(spec, 0, ts, 5000, 12), NumericError);
  CHECK_THROWS_AS(ottaviani_probe(spec, 4, {}, 5000, 12), NumericError);
}

TEST_CASE("conditional sandwich fit") {
  // Gaussian target: the conditional is exactly gaussian, so the fitted band
  // width collapses to quadrature noise.
  SandwichOptions so;
  so.level = 4;
  ProbeReport g = sandwich_probe(std_gauss(), 0.0, so);
  CHECK(g.pass);
  REQUIRE(g.fitted.count("C") == 1);
  CHECK(g.fitted.at("C") <= 1e-3);
  CHECK(g.fitted.at("sigma") == doctest::Approx(4.0).epsilon(1e-12));

  // Polynomial-Gaussian: a small positive band that shrinks with depth.
  ProbeReport p4 = sandwich_probe(std_poly(0.5), 0.5, so);
  CHECK(p4.pass);
  const double c4 = p4.fitted.at("C");
  CHECK(c4 > 1e-4);
  CHECK(c4 < 0.02);
  so.level = 6;
  ProbeReport p6 = sandwich_probe(std_poly(0.5), 0.5, so);
  const double c6 = p6.fitted.at("C");
  CHECK(c6 < c4);
}
