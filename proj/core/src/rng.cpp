#include "kmtc/rng.hpp"

#include <cmath>

namespace kmtc {

namespace {

constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kPhiloxW = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPi = 6.283185307179586;

inline void philox_round(std::uint64_t& x0, std::uint64_t& x1,
                         std::uint64_t key) {
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(kPhiloxM) * x0;
  const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
  const std::uint64_t lo = static_cast<std::uint64_t>(prod);
  x0 = hi ^ key ^ x1;
  x1 = lo;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed)), ctr_hi_(stream) {}

void RngStream::refill() {
  std::uint64_t x0 = ctr_hi_;
  std::uint64_t x1 = ctr_lo_;
  std::uint64_t key = key_;
  for (int r = 0; r < 10; ++r) {
    philox_round(x0, x1, key);
    key += kPhiloxW;
  }
  block_[0] = x0;
  block_[1] = x1;
  block_pos_ = 0;
  ++ctr_lo_;
}

std::uint64_t RngStream::next_u64() {
  if (block_pos_ > 1) refill();
  return block_[block_pos_++];
}

double RngStream::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = kTwoPi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

}  // namespace kmtc
