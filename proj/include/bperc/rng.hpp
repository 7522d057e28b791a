#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace bperc {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive hash chain; used to derive independent streams from a
// master seed and a tuple of coordinates.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

// Uniform integer in [0, range) by multiply-shift with rejection
// (Lemire 2019); exact, and avoids a division on the common path.
inline std::uint32_t uniform_below(Rng& rng, std::uint32_t range) {
  std::uint64_t x = rng();
  auto m = static_cast<unsigned __int128>(x) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - static_cast<std::uint64_t>(range)) % range;
    while (low < threshold) {
      x = rng();
      m = static_cast<unsigned __int128>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint32_t>(m >> 64);
}

// Bit pattern of a control parameter; +0 and -0 map to the same stream.
constexpr std::uint64_t double_bits(double value) {
  return value == 0.0 ? 0 : std::bit_cast<std::uint64_t>(value);
}

}  // namespace bperc
