#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kmtc {

// Blocks at level n have length 2^n; block k covers summand indices
// (k 2^n, (k+1) 2^n] with m counted from 1.

// Index of the level-n block containing summand m: ceil(m / 2^n) - 1.
std::uint64_t l_index(unsigned n, std::uint64_t m);

// Index (at level n-1) of the sibling of the child block containing m, for
// n >= 1: the other half of the level-n block that m falls in.
std::uint64_t sibling_index(unsigned n, std::uint64_t m);

// Butterfly map on R^{2d}: out[j] = x[j] + x[d+j], out[d+j] = x[j] - x[d+j].
// Composed with itself it is 2 * identity; operator norm sqrt(2).
void apply_A(std::span<const double> x, std::span<double> out);

struct DecompTerm {
  unsigned n = 0;        // level
  std::uint64_t k = 0;   // block index at that level
  double gamma = 0.0;    // coefficient in [0, 1/2]
};

// Prefix-sum decomposition: S_m = global_coeff * S_{2^N} + sum of
// gamma * (difference of the two half-blocks of block (n, k)), with one term
// per level n = r+1 .. N where 2^r is the largest power of two dividing m.
struct Decomposition {
  std::uint64_t m = 0;
  unsigned N = 0;
  unsigned r = 0;
  double global_coeff = 0.0;
  std::vector<DecompTerm> terms;
};

// All coefficients are dyadic rationals with denominator 2^N, exact in double.
Decomposition decompose(std::uint64_t m, unsigned N);

}  // namespace kmtc
