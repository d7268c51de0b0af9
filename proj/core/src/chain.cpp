#include "kmtc/chain.hpp"

#include <algorithm>
#include <cmath>

#include "kmtc/errors.hpp"

namespace kmtc {

std::uint64_t chain_checkpoint(unsigned s) {
  if (s == 0) return 0;
  if (s > 5) throw NumericError("chain_checkpoint: exponent out of range");
  return std::uint64_t{1} << (std::uint64_t{1} << s);
}

ChainOutput compose_chain(const ChainConfig& cfg, std::uint64_t seed) {
  if (cfg.s_max < 1 || (1u << cfg.s_max) > 14)
    throw NumericError("compose_chain: s_max must be in [1, 3]");

  const unsigned d = cfg.family.d();
  ChainOutput out;
  out.d = d;
  out.total_count = chain_checkpoint(cfg.s_max);
  out.x.reserve(out.total_count * d);
  out.y.reserve(out.total_count * d);
  out.disc.reserve(out.total_count);

  std::vector<double> carry(d, 0.0);
  double global_delta = 0.0;

  for (unsigned s = 1; s <= cfg.s_max; ++s) {
    const std::uint64_t rows = chain_checkpoint(s) - chain_checkpoint(s - 1);
    EngineConfig ec;
    ec.N = 1u << s;
    ec.d = d;
    ec.family = cfg.family;
    ec.grid = cfg.grid;
    ec.inversion_tol = cfg.inversion_tol;
    ec.conditional_points = cfg.conditional_points;
    const std::uint64_t block_count = std::uint64_t{1} << ec.N;
    ec.target_count = rows < block_count ? rows : 0;

    CouplingEngine engine(ec);
    CouplingOutput run = engine.run_replicate(seed, s, true);

    ChainBlock blk;
    blk.s = s;
    blk.N = ec.N;
    blk.rows = rows;
    blk.underflow_count = run.underflow_count;
    blk.delta = 0.0;
    for (std::uint64_t i = 0; i < rows; ++i)
      blk.delta = std::max(blk.delta, run.disc[i]);
    out.blocks.push_back(blk);
    out.delta_bound += blk.delta;
    out.underflow_total += run.underflow_count;

    out.x.insert(out.x.end(), run.x.begin(), run.x.begin() + rows * d);
    out.y.insert(out.y.end(), run.y.begin(), run.y.begin() + rows * d);
    for (std::uint64_t i = 0; i < rows; ++i) {
      double m = 0.0;
      for (unsigned c = 0; c < d; ++c) {
        carry[c] += run.x[i * d + c] - run.y[i * d + c];
        m = std::max(m, std::abs(carry[c]));
      }
      out.disc.push_back(m);
      global_delta = std::max(global_delta, m);
    }
  }
  out.delta = global_delta;
  return out;
}

}  // namespace kmtc
