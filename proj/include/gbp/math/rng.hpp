#pragma once

// Counter-based random number generation (Threefry-2x64, 20 rounds), keyed by
// (master_seed, stream_index). Streams with distinct keys are independent and
// replayable, which makes parallel simulation reproducible regardless of
// scheduling. See Salmon et al., "Parallel random numbers: as easy as 1, 2, 3"
// (SC'11) for the cipher construction.

#include <bit>
#include <cmath>
#include <cstdint>

#include "gbp/errors.hpp"

namespace gbp {

namespace detail {
inline void threefry2x64(std::uint64_t c0, std::uint64_t c1, std::uint64_t k0,
                         std::uint64_t k1, std::uint64_t out[2]) {
  constexpr std::uint64_t parity = 0x1BD11BDAA9FC1A22ULL;
  constexpr int rot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
  const std::uint64_t ks[3] = {k0, k1, parity ^ k0 ^ k1};
  std::uint64_t x0 = c0 + ks[0];
  std::uint64_t x1 = c1 + ks[1];
  for (int round = 0; round < 20; ++round) {
    x0 += x1;
    x1 = std::rotl(x1, rot[round & 7]);
    x1 ^= x0;
    if ((round & 3) == 3) {
      const int s = round / 4 + 1;
      x0 += ks[s % 3];
      x1 += ks[(s + 1) % 3] + static_cast<std::uint64_t>(s);
    }
  }
  out[0] = x0;
  out[1] = x1;
}
}  // namespace detail

// A value-semantics random stream. Copying a stream replays it; two streams
// with different (master_seed, stream_index) are statistically independent.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : key0_(master_seed), key1_(stream_index) {}

  std::uint64_t master_seed() const { return key0_; }
  std::uint64_t stream_index() const { return key1_; }

  std::uint64_t next_u64() {
    if (have_ == 0) {
      detail::threefry2x64(counter_++, 0, key0_, key1_, buf_);
      have_ = 2;
    }
    return buf_[2 - have_--];
  }

  // uniform on (0,1); never returns an exact endpoint
  double uniform() {
    std::uint64_t bits = next_u64() >> 11;  // 53 bits
    if (bits == 0) bits = 1;
    return static_cast<double>(bits) * 0x1.0p-53;
  }

 private:
  std::uint64_t key0_, key1_;
  std::uint64_t counter_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int have_ = 0;
};

}  // namespace gbp
