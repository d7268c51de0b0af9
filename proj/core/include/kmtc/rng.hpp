#pragma once

#include <cstdint>

namespace kmtc {

// Counter-based stream: Philox2x64-10 keyed by splitmix64(seed), with the
// stream id in the high counter word. Streams with distinct ids are disjoint
// by construction, so replicates can be split deterministically from one
// master seed and run in any thread order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double next_uniform();   // (0, 1), 53-bit resolution, never exactly 0 or 1
  double next_gaussian();  // Box-Muller pair, no rejection

  std::uint64_t stream_id() const { return ctr_hi_; }

 private:
  void refill();

  std::uint64_t key_ = 0;
  std::uint64_t ctr_hi_ = 0;
  std::uint64_t ctr_lo_ = 0;
  std::uint64_t block_[2] = {0, 0};
  int block_pos_ = 2;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace kmtc
