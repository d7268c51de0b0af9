#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "kmtc/conditional.hpp"
#include "kmtc/convolution.hpp"
#include "kmtc/coupling.hpp"
#include "kmtc/dyadic.hpp"
#include "kmtc/family.hpp"
#include "kmtc/rng.hpp"

namespace {

using namespace kmtc;

FamilySpec1D poly_spec(double tau) {
  FamilySpec1D s;
  s.kind = FamilyKind::poly_gaussian;
  s.tau = tau;
  return s;
}

void bm_rng_uniform(benchmark::State& state) {
  RngStream g(1, 0);
  double acc = 0.0;
  for (auto _ : state) acc += g.next_uniform();
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_rng_uniform);

void bm_rng_gaussian(benchmark::State& state) {
  RngStream g(1, 0);
  double acc = 0.0;
  for (auto _ : state) acc += g.next_gaussian();
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_rng_gaussian);

void bm_convolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  GridPolicy pol;
  pol.n_points = n;
  pol.max_points = 3 * n;
  const GridDensity p = build_density(standardize(poly_spec(0.5)), pol);
  for (auto _ : state) {
    GridDensity r = convolve(p, p);
    benchmark::DoNotOptimize(r.values.data());
  }
}
BENCHMARK(bm_convolve)->Arg(1 << 12)->Arg(1 << 14);

void bm_self_convolve_pow2(benchmark::State& state) {
  const GridDensity p = build_density(standardize(poly_spec(0.5)));
  ConvPolicy cp;
  cp.radius_sigma = 8.0;
  cp.max_points = 3 * (std::size_t{1} << 14);
  for (auto _ : state) {
    GridDensity r =
        self_convolve_pow2(p, static_cast<unsigned>(state.range(0)), cp);
    benchmark::DoNotOptimize(r.values.data());
  }
}
BENCHMARK(bm_self_convolve_pow2)->Arg(4)->Arg(8);

void bm_conditional_build_invert(benchmark::State& state) {
  const GridDensity p = build_density(standardize(poly_spec(0.5)));
  ConditionalOptions opts;
  opts.n_points = static_cast<std::size_t>(state.range(0));
  double u = 0.001;
  for (auto _ : state) {
    const GridCdf f = conditional_diff_cdf(p, p, 0.4, opts);
    u += 0.01;
    if (u >= 1.0) u -= 0.998;
    benchmark::DoNotOptimize(f.invert(u));
  }
}
BENCHMARK(bm_conditional_build_invert)->Arg(1 << 10)->Arg(1 << 12);

void bm_engine_run(benchmark::State& state) {
  EngineConfig ec;
  ec.N = static_cast<unsigned>(state.range(0));
  ec.d = 1;
  ec.family = replicate(standardize(poly_spec(0.3)), 1);
  const CouplingEngine eng(ec);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const CouplingOutput out = eng.run_replicate(5, rep++, false);
    benchmark::DoNotOptimize(out.delta);
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << ec.N));
}
BENCHMARK(bm_engine_run)->Arg(8)->Arg(10);

void bm_engine_run_gaussian(benchmark::State& state) {
  EngineConfig ec;
  ec.N = static_cast<unsigned>(state.range(0));
  ec.d = 1;
  FamilySpec1D g;
  g.kind = FamilyKind::gaussian;
  ec.family = replicate(standardize(g), 1);
  const CouplingEngine eng(ec);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const CouplingOutput out = eng.run_replicate(5, rep++, false);
    benchmark::DoNotOptimize(out.delta);
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << ec.N));
}
BENCHMARK(bm_engine_run_gaussian)->Arg(10);

void bm_decompose(benchmark::State& state) {
  std::uint64_t m = 1;
  for (auto _ : state) {
    const Decomposition dec = decompose(m, 14);
    benchmark::DoNotOptimize(dec.terms.data());
    m = m % ((std::uint64_t{1} << 14) - 1) + 1;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_decompose);

}  // namespace

BENCHMARK_MAIN();
