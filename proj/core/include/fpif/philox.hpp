#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fpif {

/// Philox4x32-10 counter-based generator. Stateless: every (key, counter)
/// pair maps to four independent 32-bit words, so particle streams can be
/// partitioned across threads in any way without changing the draws.
struct Philox4x32 {
  static constexpr uint32_t kM0 = 0xD2511F53u;
  static constexpr uint32_t kM1 = 0xCD9E8D57u;
  static constexpr uint32_t kW0 = 0x9E3779B9u;
  static constexpr uint32_t kW1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> generate(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = static_cast<uint64_t>(kM0) * ctr[0];
      const uint64_t p1 = static_cast<uint64_t>(kM1) * ctr[2];
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
      const uint32_t lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
      const uint32_t lo1 = static_cast<uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

/// Uniform in (0, 1): never returns 0 or 1 exactly.
inline double uniform_from_bits(uint32_t hi, uint32_t lo) {
  const uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// One standard normal per (key, counter) via Box-Muller.
inline double standard_normal(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
  const auto r = Philox4x32::generate(ctr, key);
  const double u1 = uniform_from_bits(r[0], r[1]);
  const double u2 = uniform_from_bits(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace fpif
