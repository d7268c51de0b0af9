#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kmtc/family.hpp"
#include "kmtc/grid.hpp"

namespace kmtc {

// One tested point of a probe: empirical value vs the bound it must stay
// under; margin = bound - empirical (negative means violation).
struct ProbePoint {
  double x = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  double margin = 0.0;
};

struct ProbeReport {
  std::string name;
  std::vector<ProbePoint> points;
  double worst_margin = 0.0;
  std::map<std::string, double> fitted;  // named fitted constants
  std::vector<std::string> notes;
  bool pass = true;
};

struct ClassWitness {
  double z = 0.0;
  double third = 0.0;  // |phi'''(z)|
};

// Estimated smoothness-class parameter of a 1-D family: the sup of the
// normalized third derivative of the cumulant function over real z.
struct ClassReport {
  std::string family_id;
  double tau_hat = 0.0;
  double var_normalizer = 1.0;  // phi''(0)
  double max_third = 0.0;
  double z_radius_used = 0.0;
  std::vector<ClassWitness> witnesses;
};

struct TauOptions {
  double z_radius = 1.0;
  std::size_t n_z = 41;
  double fd_step = 1e-2;
  GridPolicy grid{};
};

ClassReport estimate_tau(const FamilySpec1D& spec, TauOptions opts = {});

// |characteristic function| of the h-tilt of p at frequency t.
double cf_abs(const GridDensity& p, double h, double t);
std::vector<double> cf_abs_table(const GridDensity& p, double h,
                                 const std::vector<double>& ts);

struct SmoothnessOptions {
  double rho = 4.0;
  double h_frac_max = 0.9;  // largest tested |h| as a fraction of 1/tau
  std::size_t axis_points = 0;  // 0: picked from j
  GridPolicy grid{};
};

// Integrates |F_h^(t)| outside the ball rho*|t|*tau*j >= 1 for the
// j-dimensional projection of a rotated level-n block pair and compares
// against (2*pi)^(j/2) * tau * j^(3/2) / (sigma * sqrt(det D)) with
// sigma^2 = 2^n and det D = 2^(n*j).
ProbeReport check_smoothness_integrals(const ProductFamily& fam, double tau,
                                       unsigned n_level, unsigned j,
                                       SmoothnessOptions opts = {});

// Empirical two-regime tail check: P{|xi - E xi| >= x} against
// 2*max{exp(-x^2/(4 sigma^2)), exp(-x/(4 tau))} plus 3 binomial SEs.
ProbeReport bernstein_probe(const FamilySpec1D& spec, double h, double tau_hat,
                            std::uint64_t reps, std::uint64_t seed,
                            unsigned jobs = 1, std::size_t n_x = 17);

// Maximal inequality check: P{max_k |S_k| > 3t} <= 3 max_k P{|S_k| > t}.
ProbeReport ottaviani_probe(const FamilySpec1D& spec, unsigned n,
                            const std::vector<double>& t_grid,
                            std::uint64_t reps, std::uint64_t seed,
                            unsigned jobs = 1);

struct SandwichOptions {
  unsigned level = 4;
  std::vector<double> s_grid;  // empty: default +-2 sigma, 5 points
  std::vector<double> z_grid;  // empty: default +-3 sigma, 13 points
  std::size_t cond_points = 2049;
  GridPolicy grid{};
};

// Fits the smallest C with Phi_sigma(z - g(z)) <= F(z|s) <= Phi_sigma(z + g(z))
// for g(z) = C * tau * (1 + z^2/sigma^2); exploratory, always passes.
ProbeReport sandwich_probe(const FamilySpec1D& spec, double tau,
                           SandwichOptions opts = {});

}  // namespace kmtc
