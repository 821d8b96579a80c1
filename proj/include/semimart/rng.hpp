#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace semimart {

// Philox 4x32-10 counter-based generator. Every draw is a pure function of
// (seed, stream, index), so simulations are reproducible no matter how the
// work is split across threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  // four independent 32-bit words for step `index`
  std::array<std::uint32_t, 4> block(std::uint64_t index) const {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(index),
        static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32),
    };
    std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed_),
        static_cast<std::uint32_t>(seed_ >> 32),
    };
    for (int round = 0; round < 10; ++round) {
      ctr = philox_round(ctr, key);
      key[0] += 0x9E3779B9u;  // Weyl constants
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  // uniform in (0,1], 53-bit resolution
  double uniform(std::uint64_t index, int lane = 0) const {
    auto b = block(index);
    std::uint64_t hi = b[lane * 2], lo = b[lane * 2 + 1];
    std::uint64_t bits = (hi << 32) | lo;
    return ((bits >> 11) + 1) * 0x1.0p-53;
  }

  // standard normal via Box-Muller on lanes 0 and 1
  double normal(std::uint64_t index) const {
    auto b = block(index);
    std::uint64_t bits1 = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    std::uint64_t bits2 = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    double u1 = ((bits1 >> 11) + 1) * 0x1.0p-53;  // in (0,1]
    double u2 = (bits2 >> 11) * 0x1.0p-53;        // in [0,1)
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  static std::array<std::uint32_t, 4> philox_round(
      std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint64_t kMul0 = 0xD2511F53;
    constexpr std::uint64_t kMul1 = 0xCD9E8D57;
    std::uint64_t p0 = kMul0 * ctr[0];
    std::uint64_t p1 = kMul1 * ctr[2];
    return {
        static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
        static_cast<std::uint32_t>(p0),
    };
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace semimart
