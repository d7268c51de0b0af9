#include "kmtc/dyadic.hpp"

#include <bit>

#include "kmtc/errors.hpp"

namespace kmtc {

std::uint64_t l_index(unsigned n, std::uint64_t m) {
  if (m == 0) throw NumericError("l_index: m counts from 1");
  return (m - 1) >> n;
}

std::uint64_t sibling_index(unsigned n, std::uint64_t m) {
  if (n == 0) throw NumericError("sibling_index: needs n >= 1");
  const std::uint64_t parent = l_index(n, m);
  const std::uint64_t child = l_index(n - 1, m);
  return (child == 2 * parent + 1) ? 2 * parent : 2 * parent + 1;
}

void apply_A(std::span<const double> x, std::span<double> out) {
  if (x.size() != out.size() || x.size() % 2 != 0)
    throw NumericError("apply_A: needs matching even-sized spans");
  const std::size_t d = x.size() / 2;
  for (std::size_t j = 0; j < d; ++j) {
    const double a = x[j];
    const double b = x[d + j];
    out[j] = a + b;
    out[d + j] = a - b;
  }
}

Decomposition decompose(std::uint64_t m, unsigned N) {
  if (N >= 63) throw NumericError("decompose: N too large");
  const std::uint64_t total = std::uint64_t{1} << N;
  if (m == 0 || m > total) throw NumericError("decompose: m out of range");

  Decomposition dec;
  dec.m = m;
  dec.N = N;
  dec.r = static_cast<unsigned>(std::countr_zero(m));
  dec.global_coeff =
      static_cast<double>(m) / static_cast<double>(total);

  // Walk levels top-down. Before level n every summand of the level-n block
  // containing m carries weight a = m / 2^n - l (a dyadic rational, held as
  // the integer remainder rem = m - l 2^n). Adding gamma times the half-block
  // difference fixes the finished sibling's weight to 1 or 0 and doubles the
  // residual; the walk stops where 2^n divides m and the weight is exactly 1.
  for (unsigned n = N; n > dec.r; --n) {
    const std::uint64_t len = std::uint64_t{1} << n;
    const std::uint64_t l = l_index(n, m);
    const std::uint64_t rem = m - l * len;  // in [1, len)
    DecompTerm t;
    t.n = n;
    t.k = l;
    if (2 * rem <= len) {
      // m in the left half: the right sibling must come out weight 0.
      t.gamma = static_cast<double>(rem) / static_cast<double>(len);
    } else {
      // m in the right half: the left sibling must come out weight 1.
      t.gamma = static_cast<double>(len - rem) / static_cast<double>(len);
    }
    dec.terms.push_back(t);
  }
  return dec;
}

}  // namespace kmtc
