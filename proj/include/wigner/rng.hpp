#ifndef WIGNER_RNG_HPP
#define WIGNER_RNG_HPP

#include <cstdint>
#include <cmath>
#include <array>

namespace wigner {

/// Counter-based generator (Philox 4x32-10). Streams indexed by (seed, stream)
/// are statistically independent and insensitive to draw interleaving, so
/// per-trajectory streams reproduce bitwise for any worker count.
class Philox {
public:
  Philox(uint64_t seed, uint64_t stream) noexcept {
    key_[0] = static_cast<uint32_t>(seed);
    key_[1] = static_cast<uint32_t>(seed >> 32);
    stream_lo_ = static_cast<uint32_t>(stream);
    stream_hi_ = static_cast<uint32_t>(stream >> 32);
  }

  /// Raw 128-bit block for counter value `n` under this stream's key.
  std::array<uint32_t, 4> block(uint64_t n) const noexcept {
    std::array<uint32_t, 4> ctr{static_cast<uint32_t>(n),
                                static_cast<uint32_t>(n >> 32),
                                stream_lo_, stream_hi_};
    uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = M0 * static_cast<uint64_t>(ctr[0]);
      const uint64_t p1 = M1 * static_cast<uint64_t>(ctr[2]);
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
      k0 += W0;
      k1 += W1;
    }
    return ctr;
  }

  /// Two doubles in (0,1), one counter block.
  std::array<double, 2> uniform2() noexcept {
    const auto b = block(counter_++);
    const uint64_t u0 = (static_cast<uint64_t>(b[1]) << 32) | b[0];
    const uint64_t u1 = (static_cast<uint64_t>(b[3]) << 32) | b[2];
    // (x >> 11) + 0.5 over 2^53 never yields exactly 0 or 1
    constexpr double scale = 1.0 / 9007199254740992.0; // 2^-53
    return {(static_cast<double>(u0 >> 11) + 0.5) * scale,
            (static_cast<double>(u1 >> 11) + 0.5) * scale};
  }

  /// Standard normal pair (Box-Muller), one counter block.
  std::array<double, 2> normal2() noexcept {
    const auto u = uniform2();
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double t = 6.283185307179586476925287 * u[1];
    return {r * std::cos(t), r * std::sin(t)};
  }

  double normal() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto n = normal2();
    spare_ = n[1];
    have_spare_ = true;
    return n[0];
  }

  double uniform() noexcept {
    if (have_spare_u_) {
      have_spare_u_ = false;
      return spare_u_;
    }
    const auto u = uniform2();
    spare_u_ = u[1];
    have_spare_u_ = true;
    return u[0];
  }

  uint64_t counter() const noexcept { return counter_; }

private:
  static constexpr uint64_t M0 = 0xD2511F53ull;
  static constexpr uint64_t M1 = 0xCD9E8D57ull;
  static constexpr uint32_t W0 = 0x9E3779B9u;
  static constexpr uint32_t W1 = 0xBB67AE85u;

  std::array<uint32_t, 2> key_{};
  uint32_t stream_lo_ = 0, stream_hi_ = 0;
  uint64_t counter_ = 0;
  double spare_ = 0, spare_u_ = 0;
  bool have_spare_ = false, have_spare_u_ = false;
};

} // namespace wigner

#endif
