#pragma once

// Deterministic seeded random streams with derived sub-streams.
//
// A stream is identified by a 64-bit key that is a pure function of the root
// seed and the derivation path (a sequence of (tag, index) pairs). Child
// derivation hashes the tag and index into the parent key with an
// avalanche-quality mixer, so the same (seed, path) always reproduces the
// same draws regardless of thread scheduling or how much the parent stream
// was consumed. The generator core is xoshiro256++, seeded via splitmix64.

#include <array>
#include <cstdint>
#include <string_view>

#include "swd/common.hpp"

namespace swd {

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : RngStream(mix64(seed ^ 0x53574453544D3031ull), /*from_key=*/true) {}

  // Derived sub-stream; pure function of (key, tag, index).
  RngStream child(std::string_view tag, std::uint64_t index = 0) const {
    std::uint64_t k = mix64(key_ ^ fnv1a64(tag));
    k = mix64(k + 0x9E3779B97F4A7C15ull * (index + 1));
    return RngStream(k, /*from_key=*/true);
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform index in [0, n) via 128-bit multiply.
  std::size_t uniform_index(std::size_t n) {
    require(n >= 1, "uniform_index: n must be >= 1");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  RngStream(std::uint64_t key, bool) : key_(key) {
    std::uint64_t sm = key_;
    for (auto& word : s_) {
      sm += 0x9E3779B97F4A7C15ull;
      word = mix64(sm);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t key_;
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace swd
