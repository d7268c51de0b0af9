#pragma once

#include <cstdint>
#include <vector>

#include "kmtc/coupling.hpp"
#include "kmtc/family.hpp"

namespace kmtc {

// Doubly exponential block layout: checkpoint m_s = 2^(2^s), block s covers
// rows (m_{s-1}, m_s]. Each block is an independent dyadic run of size
// 2^(2^s) whose trailing rows past the checkpoint are standard Gaussian
// padding; only the first n_s = m_s - m_{s-1} rows are emitted.
struct ChainConfig {
  unsigned s_max = 3;  // 2^s_max <= 14, so s_max <= 3
  ProductFamily family;
  GridPolicy grid;
  double inversion_tol = 1e-8;
  std::size_t conditional_points = 1024;
};

struct ChainBlock {
  unsigned s = 0;
  unsigned N = 0;            // dyadic depth of the block's run
  std::uint64_t rows = 0;    // rows emitted from this block
  double delta = 0.0;        // sup over block-local prefixes
  std::uint64_t underflow_count = 0;
};

struct ChainOutput {
  unsigned d = 1;
  std::uint64_t total_count = 0;
  double delta = 0.0;        // sup over global prefixes
  double delta_bound = 0.0;  // sum of block deltas; always >= delta
  std::uint64_t underflow_total = 0;
  std::vector<ChainBlock> blocks;
  std::vector<double> x;  // row-major, total_count rows of d
  std::vector<double> y;
  std::vector<double> disc;  // per-row max-coordinate |prefix difference|
};

std::uint64_t chain_checkpoint(unsigned s);  // m_s = 2^(2^s), m_0 = 0

ChainOutput compose_chain(const ChainConfig& cfg, std::uint64_t seed);

}  // namespace kmtc
