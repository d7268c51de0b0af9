#include <doctest.h>

#include <cmath>
#include <vector>

#include "kmtc/chain.hpp"
#include "kmtc/errors.hpp"
#include "kmtc/family.hpp"

using namespace kmtc;

namespace {

ChainConfig poly_chain(unsigned s_max, double tau, unsigned d) {
  FamilySpec1D s;
  s.kind = FamilyKind::poly_gaussian;
  s.tau = tau;
  ChainConfig cfg;
  cfg.s_max = s_max;
  cfg.family = replicate(standardize(s), d);
  return cfg;
}

}  // namespace

TEST_CASE("checkpoints double exponentially") {
  CHECK(chain_checkpoint(0) == 0);
  CHECK(chain_checkpoint(1) == 4);
  CHECK(chain_checkpoint(2) == 16);
  CHECK(chain_checkpoint(3) == 256);
  CHECK(chain_checkpoint(4) == 65536);
  CHECK_THROWS_AS(chain_checkpoint(9), NumericError);
}

TEST_CASE("a gaussian chain couples exactly") {
  FamilySpec1D g;
  g.kind = FamilyKind::gaussian;
  ChainConfig cfg;
  cfg.s_max = 2;
  cfg.family = replicate(standardize(g), 1);
  ChainOutput out = compose_chain(cfg, 3);
  CHECK(out.total_count == 16);
  CHECK(out.delta <= 1e-12);
}

TEST_CASE("block layout of a full chain") {
  ChainConfig cfg = poly_chain(3, 0.4, 1);
  ChainOutput out = compose_chain(cfg, 12);

  CHECK(out.d == 1);
  CHECK(out.total_count == 256);
  REQUIRE(out.x.size() == 256);
  REQUIRE(out.y.size() == 256);
  REQUIRE(out.disc.size() == 256);
  REQUIRE(out.blocks.size() == 3);

  CHECK(out.blocks[0].s == 1);
  CHECK(out.blocks[0].N == 2);
  CHECK(out.blocks[0].rows == 4);
  CHECK(out.blocks[1].s == 2);
  CHECK(out.blocks[1].N == 4);
  CHECK(out.blocks[1].rows == 12);
  CHECK(out.blocks[2].s == 3);
  CHECK(out.blocks[2].N == 8);
  CHECK(out.blocks[2].rows == 240);

  std::uint64_t uf = 0;
  for (const ChainBlock& b : out.blocks) uf += b.underflow_count;
  CHECK(out.underflow_total == uf);
}

TEST_CASE("chain discrepancy tracks the emitted paths") {
  ChainConfig cfg = poly_chain(2, 0.6, 2);
  ChainOutput out = compose_chain(cfg, 5);
  REQUIRE(out.total_count == 16);
  REQUIRE(out.x.size() == 32);

  std::vector<double> carry(out.d, 0.0);
  double sup = 0.0;
  for (std::uint64_t m = 0; m < out.total_count; ++m) {
    double row = 0.0;
    for (unsigned c = 0; c < out.d; ++c) {
      carry[c] += out.x[m * out.d + c] - out.y[m * out.d + c];
      row = std::max(row, std::abs(carry[c]));
    }
    CHECK(out.disc[m] == doctest::Approx(row).scale(1.0).epsilon(1e-12));
    sup = std::max(sup, row);
  }
  CHECK(out.delta == doctest::Approx(sup).scale(1.0).epsilon(1e-12));

  // The triangle bound over blocks dominates the global discrepancy.
  double bound = 0.0;
  for (const ChainBlock& b : out.blocks) bound += b.delta;
  CHECK(out.delta_bound == doctest::Approx(bound).scale(1.0).epsilon(1e-12));
  CHECK(out.delta <= out.delta_bound + 1e-12);
}

TEST_CASE("chains are deterministic in the seed") {
  ChainConfig cfg = poly_chain(2, 0.5, 1);
  ChainOutput a = compose_chain(cfg, 41);
  ChainOutput b = compose_chain(cfg, 41);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.delta == b.delta);
  ChainOutput c = compose_chain(cfg, 42);
  CHECK(a.x != c.x);
}

TEST_CASE("chain depth is capped by the engine") {
  ChainConfig cfg = poly_chain(3, 0.5, 1);
  cfg.s_max = 4;  // would need a depth-16 dyadic run
  CHECK_THROWS_AS(compose_chain(cfg, 1), NumericError);
  cfg.s_max = 0;
  CHECK_THROWS_AS(compose_chain(cfg, 1), NumericError);
}
